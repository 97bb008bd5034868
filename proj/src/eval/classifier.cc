// Copyright 2026 The psyn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "psyn/eval/classifier.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "psyn/common/files.h"
#include "psyn/common/status_macros.h"

namespace psyn {
namespace {

absl::Status CheckBatch(const ClassifierParams& params, const Eigen::MatrixXd& x,
                        std::span<const int> labels) {
  if (x.cols() != params.weight.cols()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "rows have width ", x.cols(), ", classifier expects ", params.weight.cols()));
  }
  if (static_cast<Eigen::Index>(labels.size()) != x.rows()) {
    return absl::InvalidArgumentError("label count does not match row count");
  }
  for (int y : labels) {
    if (y < 0 || y >= params.weight.rows()) {
      return absl::InvalidArgumentError(absl::StrCat("invalid class index ", y));
    }
  }
  return absl::OkStatus();
}

// Row-wise log-softmax.
Eigen::MatrixXd LogSoftmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out = logits;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double m = out.row(r).maxCoeff();
    const double lse = m + std::log((out.row(r).array() - m).exp().sum());
    out.row(r).array() -= lse;
  }
  return out;
}

// Sum of row cross-entropies; `delta` receives softmax - one_hot.
double CrossEntropy(const ClassifierParams& params, const Eigen::MatrixXd& x,
                    std::span<const int> labels, Eigen::MatrixXd* delta) {
  Eigen::MatrixXd logits = x * params.weight.transpose();
  logits.rowwise() += params.bias.transpose();
  const Eigen::MatrixXd log_p = LogSoftmax(logits);
  double loss = 0.0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) loss -= log_p(r, labels[r]);
  if (delta != nullptr) {
    *delta = log_p.array().exp();
    for (Eigen::Index r = 0; r < x.rows(); ++r) (*delta)(r, labels[r]) -= 1.0;
  }
  return loss;
}

}  // namespace

absl::Status ClassifierConfig::Validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    return absl::InvalidArgumentError("classifier learning rate must be positive");
  }
  if (steps < 0) return absl::InvalidArgumentError("classifier steps must be >= 0");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) {
    return absl::InvalidArgumentError("classifier l2 must be >= 0");
  }
  return absl::OkStatus();
}

nlohmann::json ClassifierConfig::ToJson() const {
  return {{"learning_rate", learning_rate}, {"steps", steps}, {"l2", l2}};
}

absl::StatusOr<ClassifierConfig> ClassifierConfig::FromJson(const nlohmann::json& json) {
  ClassifierConfig config;
  try {
    for (const auto& [key, value] : json.items()) {
      if (key == "learning_rate") {
        config.learning_rate = value.get<double>();
      } else if (key == "steps") {
        config.steps = value.get<int>();
      } else if (key == "l2") {
        config.l2 = value.get<double>();
      } else {
        return absl::InvalidArgumentError(
            absl::StrCat("unknown classifier key '", key, "'"));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("invalid classifier config: ", e.what()));
  }
  PSYN_RETURN_IF_ERROR(config.Validate());
  return config;
}

std::string ClassifierConfig::Hash() const { return Sha256Hex(ToJson().dump()); }

ClassifierParams ClassifierParams::Zeros(int num_classes, int width) {
  return {Eigen::MatrixXd::Zero(num_classes, width), Eigen::VectorXd::Zero(num_classes)};
}

ParameterSet SoftmaxObjective::Parameters() const {
  ParameterSet out;
  out.push_back(params_.weight);
  out.push_back(Eigen::MatrixXd(params_.bias));
  return out;
}

absl::Status SoftmaxObjective::SetParameters(const ParameterSet& params) {
  if (params.size() != 2 || params[0].rows() != params_.weight.rows() ||
      params[0].cols() != params_.weight.cols() || params[1].rows() != params_.bias.size() ||
      params[1].cols() != 1) {
    return absl::InvalidArgumentError("classifier parameter shapes do not match");
  }
  params_.weight = params[0];
  params_.bias = params[1].col(0);
  return absl::OkStatus();
}

absl::StatusOr<double> SoftmaxObjective::SumLoss(const Eigen::MatrixXd& x,
                                                 std::span<const int> labels,
                                                 const Eigen::MatrixXd&,
                                                 GradientSet* grad) const {
  PSYN_RETURN_IF_ERROR(CheckBatch(params_, x, labels));
  Eigen::MatrixXd delta;
  const double loss = CrossEntropy(params_, x, labels, grad != nullptr ? &delta : nullptr);
  if (grad != nullptr) {
    *grad = GradientSet();
    grad->push_back(delta.transpose() * x);
    grad->push_back(Eigen::MatrixXd(delta.colwise().sum().transpose()));
  }
  return loss;
}

absl::StatusOr<double> RegularizedLoss(const ClassifierParams& params,
                                       const Eigen::MatrixXd& x, std::span<const int> labels,
                                       double l2, ClassifierParams* grad) {
  PSYN_RETURN_IF_ERROR(CheckBatch(params, x, labels));
  if (x.rows() == 0) return absl::InvalidArgumentError("classifier needs training rows");
  const double n = static_cast<double>(x.rows());
  Eigen::MatrixXd delta;
  const double loss = CrossEntropy(params, x, labels, grad != nullptr ? &delta : nullptr) / n +
                      0.5 * l2 * params.weight.squaredNorm();
  if (grad != nullptr) {
    grad->weight = delta.transpose() * x / n + l2 * params.weight;
    grad->bias = delta.colwise().sum().transpose() / n;
  }
  return loss;
}

absl::StatusOr<ClassifierParams> FitClassifier(const Eigen::MatrixXd& x,
                                               std::span<const int> labels,
                                               int num_classes,
                                               const ClassifierConfig& config) {
  PSYN_RETURN_IF_ERROR(config.Validate());
  if (num_classes < 1) return absl::InvalidArgumentError("need at least one class");
  ClassifierParams params = ClassifierParams::Zeros(num_classes, static_cast<int>(x.cols()));
  ClassifierParams grad;
  for (int step = 0; step < config.steps; ++step) {
    PSYN_ASSIGN_OR_RETURN(const double loss,
                          RegularizedLoss(params, x, labels, config.l2, &grad));
    if (!std::isfinite(loss)) {
      return absl::InternalError(absl::StrCat("classifier diverged at step ", step));
    }
    params.weight -= config.learning_rate * grad.weight;
    params.bias -= config.learning_rate * grad.bias;
  }
  if (config.steps == 0) PSYN_RETURN_IF_ERROR(CheckBatch(params, x, labels));
  return params;
}

std::vector<int> Predict(const ClassifierParams& params, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd logits = x * params.weight.transpose();
  logits.rowwise() += params.bias.transpose();
  std::vector<int> out(x.rows(), 0);
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    for (Eigen::Index k = 1; k < logits.cols(); ++k) {
      if (logits(r, k) > logits(r, out[r])) out[r] = static_cast<int>(k);
    }
  }
  return out;
}

nlohmann::json ClassificationMetrics::ToJson() const {
  nlohmann::json recall = nlohmann::json::array();
  for (const auto& r : per_class_recall) {
    recall.push_back(r.has_value() ? nlohmann::json(*r) : nlohmann::json(nullptr));
  }
  return {{"accuracy", accuracy}, {"macro_f1", macro_f1}, {"per_class_recall", recall}};
}

absl::StatusOr<ClassificationMetrics> ComputeMetrics(std::span<const int> truth,
                                                     std::span<const int> predicted,
                                                     int num_classes) {
  if (truth.size() != predicted.size()) {
    return absl::InvalidArgumentError("truth and predictions differ in length");
  }
  if (truth.empty()) return absl::InvalidArgumentError("no rows to score");
  std::vector<int64_t> tp(num_classes, 0), support(num_classes, 0), called(num_classes, 0);
  int64_t correct = 0;
  for (size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= num_classes || predicted[i] < 0 ||
        predicted[i] >= num_classes) {
      return absl::InvalidArgumentError("class index out of range");
    }
    ++support[truth[i]];
    ++called[predicted[i]];
    if (truth[i] == predicted[i]) {
      ++tp[truth[i]];
      ++correct;
    }
  }
  ClassificationMetrics m;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  double f1_sum = 0.0;
  int counted = 0;
  m.per_class_recall.resize(num_classes);
  for (int k = 0; k < num_classes; ++k) {
    if (support[k] > 0) {
      m.per_class_recall[k] = static_cast<double>(tp[k]) / static_cast<double>(support[k]);
    }
    if (support[k] == 0 && called[k] == 0) continue;
    ++counted;
    f1_sum += 2.0 * static_cast<double>(tp[k]) / static_cast<double>(support[k] + called[k]);
  }
  m.macro_f1 = counted > 0 ? f1_sum / counted : 0.0;
  return m;
}

absl::StatusOr<FitEvalResult> FitEvalClassifier(const EncodedMatrix& train,
                                                const EncodedMatrix& test, int num_classes,
                                                const ClassifierConfig& config) {
  if (train.rows() == 0) return absl::InvalidArgumentError("training set is empty");
  if (test.rows() == 0) return absl::InvalidArgumentError("test set is empty");
  if (train.values.cols() != test.values.cols()) {
    return absl::InvalidArgumentError("train and test encodings differ in width");
  }
  FitEvalResult result;
  std::vector<bool> seen(num_classes, false);
  for (int y : train.labels) {
    if (y >= 0 && y < num_classes) seen[y] = true;
  }
  std::vector<bool> warned(num_classes, false);
  for (int y : test.labels) {
    if (y >= 0 && y < num_classes && !seen[y] && !warned[y]) {
      warned[y] = true;
      result.warnings.push_back(
          absl::StrCat("class ", y, " appears in the test set but not in training"));
    }
  }
  PSYN_ASSIGN_OR_RETURN(result.params,
                        FitClassifier(train.values, train.labels, num_classes, config));
  const std::vector<int> predicted = Predict(result.params, test.values);
  PSYN_ASSIGN_OR_RETURN(result.metrics, ComputeMetrics(test.labels, predicted, num_classes));
  return result;
}

}  // namespace psyn
