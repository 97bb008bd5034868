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

#ifndef PSYN_EVAL_CLASSIFIER_H_
#define PSYN_EVAL_CLASSIFIER_H_

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "psyn/neural/objective.h"
#include "psyn/tabular/encoder.h"

namespace psyn {

struct ClassifierConfig {
  double learning_rate = 0.5;
  int steps = 500;
  double l2 = 1e-4;  // on weights only

  absl::Status Validate() const;
  nlohmann::json ToJson() const;
  static absl::StatusOr<ClassifierConfig> FromJson(const nlohmann::json& json);
  // SHA-256 of the canonical JSON.
  std::string Hash() const;
};

// Multinomial logistic regression, logits = x W^T + b.
struct ClassifierParams {
  Eigen::MatrixXd weight;  // K x W
  Eigen::VectorXd bias;    // K

  static ClassifierParams Zeros(int num_classes, int width);
};

// Softmax cross-entropy as an Objective, for gradient checks. SumLoss is the
// unregularized sum over rows.
class SoftmaxObjective final : public Objective {
 public:
  explicit SoftmaxObjective(ClassifierParams params) : params_(std::move(params)) {}

  const ClassifierParams& params() const { return params_; }

  ParameterSet Parameters() const override;
  absl::Status SetParameters(const ParameterSet& params) override;
  int noise_width() const override { return 0; }
  Eigen::MatrixXd DrawNoise(int64_t rows, Rng&) const override {
    return Eigen::MatrixXd(rows, 0);
  }
  absl::StatusOr<double> SumLoss(const Eigen::MatrixXd& x, std::span<const int> labels,
                                 const Eigen::MatrixXd& noise,
                                 GradientSet* grad) const override;

 private:
  ClassifierParams params_;
};

// Mean cross-entropy plus (l2 / 2) ||W||^2, with its gradient.
absl::StatusOr<double> RegularizedLoss(const ClassifierParams& params,
                                       const Eigen::MatrixXd& x, std::span<const int> labels,
                                       double l2, ClassifierParams* grad);

// Full-batch gradient descent from zero.
absl::StatusOr<ClassifierParams> FitClassifier(const Eigen::MatrixXd& x,
                                               std::span<const int> labels,
                                               int num_classes,
                                               const ClassifierConfig& config);

// Argmax of the logits, ties to the lowest class index.
std::vector<int> Predict(const ClassifierParams& params, const Eigen::MatrixXd& x);

struct ClassificationMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  // Undefined for classes with no rows in the truth.
  std::vector<std::optional<double>> per_class_recall;

  nlohmann::json ToJson() const;
  friend bool operator==(const ClassificationMetrics&,
                         const ClassificationMetrics&) = default;
};

// Macro-F1 averages over classes present in the truth or the predictions.
absl::StatusOr<ClassificationMetrics> ComputeMetrics(std::span<const int> truth,
                                                     std::span<const int> predicted,
                                                     int num_classes);

struct FitEvalResult {
  ClassifierParams params;
  ClassificationMetrics metrics;
  std::vector<std::string> warnings;
};

absl::StatusOr<FitEvalResult> FitEvalClassifier(const EncodedMatrix& train,
                                                const EncodedMatrix& test, int num_classes,
                                                const ClassifierConfig& config);

}  // namespace psyn

#endif  // PSYN_EVAL_CLASSIFIER_H_
