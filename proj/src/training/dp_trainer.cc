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

#include "psyn/training/dp_trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "psyn/common/status_macros.h"

namespace psyn {
namespace {

void GatherRows(const EncodedMatrix& data, std::span<const int64_t> indices,
                Eigen::MatrixXd* x, std::vector<int>* labels) {
  x->resize(static_cast<Eigen::Index>(indices.size()), data.values.cols());
  labels->resize(indices.size());
  for (size_t i = 0; i < indices.size(); ++i) {
    x->row(static_cast<Eigen::Index>(i)) = data.values.row(indices[i]);
    (*labels)[i] = data.labels[indices[i]];
  }
}

double SamplingRate(const TrainConfig& config, int64_t num_rows) {
  return static_cast<double>(config.expected_batch_size) /
         static_cast<double>(num_rows);
}

}  // namespace

absl::Status TrainConfig::Validate(int64_t num_rows) const {
  if (num_rows < 1) return absl::InvalidArgumentError("training data is empty");
  if (expected_batch_size < 1 || expected_batch_size > num_rows) {
    return absl::InvalidArgumentError(absl::StrCat(
        "expected batch size must lie in [1, ", num_rows, "], got ",
        expected_batch_size));
  }
  if (max_steps < 0) return absl::InvalidArgumentError("max_steps must be non-negative");
  if (epochs.has_value() && *epochs < 0) {
    return absl::InvalidArgumentError("epochs must be non-negative");
  }
  if (!(learning_rate > 0.0)) return absl::InvalidArgumentError("learning rate must be positive");
  if (dp_enabled) {
    DpConfig checked = dp;
    checked.sampling_rate = SamplingRate(*this, num_rows);
    PSYN_RETURN_IF_ERROR(checked.Validate());
  }
  return absl::OkStatus();
}

nlohmann::json TrainConfig::ToJson() const {
  nlohmann::json json = {
      {"dp_enabled", dp_enabled},
      {"max_steps", max_steps},
      {"expected_batch_size", expected_batch_size},
      {"learning_rate", learning_rate},
      {"optimizer", std::string(OptimizerName(optimizer))},
      {"seed", seed},
      {"noise_multiplier", dp.noise_multiplier},
      {"clip_norm", std::isinf(dp.clip_norm) ? nlohmann::json("inf")
                                             : nlohmann::json(dp.clip_norm)},
      {"delta", dp.delta},
      {"epsilon_budget", dp.epsilon_budget.has_value()
                             ? nlohmann::json(*dp.epsilon_budget)
                             : nlohmann::json(nullptr)},
  };
  json["epochs"] = epochs.has_value() ? nlohmann::json(*epochs) : nlohmann::json(nullptr);
  return json;
}

nlohmann::json TrainReport::ToJson() const {
  return {{"steps", steps},
          {"loss_trace", loss_trace},
          {"sampling_rate", sampling_rate},
          {"noise_multiplier", noise_multiplier},
          {"clip_norm", std::isinf(clip_norm) ? nlohmann::json("inf")
                                              : nlohmann::json(clip_norm)},
          {"dp_enabled", dp_enabled},
          {"epsilon", spent.epsilon},
          {"delta", spent.delta},
          {"best_alpha", spent.alpha},
          {"accountant", accountant.ToJson()},
          {"abort_reason", abort_reason}};
}

TrainStreams TrainStreams::FromSeed(uint64_t seed) {
  return TrainStreams{Rng::FromSeed(seed, "train/batch"),
                      Rng::FromSeed(seed, "train/dp-noise"),
                      Rng::FromSeed(seed, "train/model")};
}

std::vector<int64_t> PoissonSample(int64_t n, double q, Rng& rng) {
  std::vector<int64_t> indices;
  if (q >= 1.0) {
    indices.resize(n);
    for (int64_t i = 0; i < n; ++i) indices[i] = i;
    return indices;
  }
  indices.reserve(static_cast<size_t>(q * n * 1.2) + 8);
  for (int64_t i = 0; i < n; ++i) {
    if (rng.Bernoulli(q)) indices.push_back(i);
  }
  return indices;
}

GradientSet ClipGradient(const GradientSet& grad, double clip_norm) {
  GradientSet clipped = grad;
  const double norm = grad.L2Norm();
  if (std::isfinite(clip_norm) && norm > clip_norm) clipped *= clip_norm / norm;
  return clipped;
}

ClippedSum::ClippedSum(const GradientSet& shape, double clip_norm)
    : sum_(TensorList::ZerosLike(shape)), clip_norm_(clip_norm) {}

absl::Status ClippedSum::Add(const GradientSet& grad) {
  if (!grad.SameShape(sum_)) {
    return absl::InvalidArgumentError("per-example gradient has the wrong shape");
  }
  if (!grad.AllFinite()) return absl::InvalidArgumentError("non-finite per-example gradient");
  const double norm = grad.L2Norm();
  const double scale =
      (std::isfinite(clip_norm_) && norm > clip_norm_) ? clip_norm_ / norm : 1.0;
  sum_.AddScaled(grad, scale);
  ++count_;
  return absl::OkStatus();
}

GradientSet ClippedSum::Finish(double noise_multiplier, double expected_batch_size,
                               Rng& rng) && {
  if (noise_multiplier > 0.0) {
    const double stddev = noise_multiplier * clip_norm_;
    for (size_t t = 0; t < sum_.size(); ++t) {
      Eigen::MatrixXd& tensor = sum_[t];
      for (Eigen::Index i = 0; i < tensor.size(); ++i) {
        tensor.data()[i] += stddev * rng.Normal();
      }
    }
  }
  sum_ *= 1.0 / expected_batch_size;
  return std::move(sum_);
}

absl::StatusOr<GradientSet> ClipAndAggregate(std::span<const GradientSet> per_example,
                                             const GradientSet& shape,
                                             double clip_norm,
                                             double noise_multiplier,
                                             double expected_batch_size, Rng& rng) {
  if (!(clip_norm > 0.0)) return absl::InvalidArgumentError("clip norm must be positive");
  if (noise_multiplier < 0.0) {
    return absl::InvalidArgumentError("noise multiplier must be non-negative");
  }
  if (noise_multiplier > 0.0 && std::isinf(clip_norm)) {
    return absl::InvalidArgumentError("noise requires a finite clip norm");
  }
  if (!(expected_batch_size > 0.0)) {
    return absl::InvalidArgumentError("expected batch size must be positive");
  }
  ClippedSum sum(shape, clip_norm);
  for (const GradientSet& grad : per_example) PSYN_RETURN_IF_ERROR(sum.Add(grad));
  return std::move(sum).Finish(noise_multiplier, expected_batch_size, rng);
}

absl::StatusOr<StepResult> DpTrainStep(Objective& model, const EncodedMatrix& data,
                                       const TrainConfig& config,
                                       OptimizerState& optimizer,
                                       AccountantState& accountant,
                                       TrainStreams& streams) {
  const int64_t n = data.rows();
  const double q = SamplingRate(config, n);
  std::optional<AccountantState> advanced;
  if (config.dp_enabled) {
    PSYN_ASSIGN_OR_RETURN(advanced, Compose(AccountantState(accountant.alphas()),
                                            accountant.steps() + 1, q,
                                            config.dp.noise_multiplier));
    if (config.dp.epsilon_budget.has_value()) {
      PSYN_ASSIGN_OR_RETURN(EpsilonDelta next, ToEpsilonDelta(*advanced, config.dp.delta));
      if (next.epsilon > *config.dp.epsilon_budget) {
        return absl::ResourceExhaustedError(absl::StrCat(
            "privacy budget exhausted: another step would spend epsilon=",
            next.epsilon, " > ", *config.dp.epsilon_budget));
      }
    }
  }

  const std::vector<int64_t> indices = PoissonSample(n, q, streams.batch);
  Eigen::MatrixXd x;
  std::vector<int> labels;
  GatherRows(data, indices, &x, &labels);
  const Eigen::MatrixXd noise = model.DrawNoise(x.rows(), streams.model);
  const ParameterSet params = model.Parameters();

  StepResult result;
  result.batch_size = static_cast<int64_t>(indices.size());
  GradientSet grad;
  if (config.dp_enabled) {
    ClippedSum sum(params, config.dp.clip_norm);
    double loss_sum = 0.0;
    absl::Status add_status = absl::OkStatus();
    PSYN_RETURN_IF_ERROR(ForEachExampleGrad(
        model, x, labels, noise, [&](int64_t, double loss, GradientSet g) {
          loss_sum += loss;
          if (add_status.ok()) add_status = sum.Add(g);
        }));
    PSYN_RETURN_IF_ERROR(add_status);
    grad = std::move(sum).Finish(config.dp.noise_multiplier,
                                 config.expected_batch_size, streams.noise);
    if (result.batch_size > 0) result.loss = loss_sum / result.batch_size;
  } else {
    if (result.batch_size == 0) return result;
    PSYN_ASSIGN_OR_RETURN(const double loss_sum, model.SumLoss(x, labels, noise, &grad));
    if (!std::isfinite(loss_sum)) return absl::InvalidArgumentError("non-finite batch loss");
    grad *= 1.0 / static_cast<double>(result.batch_size);
    result.loss = loss_sum / result.batch_size;
  }
  PSYN_ASSIGN_OR_RETURN(ParameterSet updated, OptimizerStep(params, grad, optimizer));
  PSYN_RETURN_IF_ERROR(model.SetParameters(updated));
  if (advanced.has_value()) accountant = std::move(*advanced);
  return result;
}

int64_t PlannedSteps(const TrainConfig& config, int64_t num_rows) {
  int64_t steps = config.max_steps;
  if (config.epochs.has_value()) {
    const int64_t per_epoch =
        (num_rows + config.expected_batch_size - 1) / config.expected_batch_size;
    steps = std::min<int64_t>(steps, static_cast<int64_t>(*config.epochs) * per_epoch);
  }
  return steps;
}

absl::StatusOr<TrainReport> TrainLoop(Objective& model, const EncodedMatrix& data,
                                      TrainConfig config) {
  const int64_t n = data.rows();
  PSYN_RETURN_IF_ERROR(config.Validate(n));
  config.dp.sampling_rate = SamplingRate(config, n);

  TrainReport report;
  report.dp_enabled = config.dp_enabled;
  report.sampling_rate = config.dp.sampling_rate;
  report.noise_multiplier = config.dp.noise_multiplier;
  report.clip_norm = config.dp.clip_norm;
  report.accountant = AccountantState(config.dp.alpha_grid);
  report.spent.delta = config.dp.delta;

  TrainStreams streams = TrainStreams::FromSeed(config.seed);
  OptimizerState optimizer =
      MakeOptimizer(config.optimizer, model.Parameters(), config.learning_rate);
  const int64_t planned = PlannedSteps(config, n);
  for (int64_t step = 0; step < planned; ++step) {
    absl::StatusOr<StepResult> result =
        DpTrainStep(model, data, config, optimizer, report.accountant, streams);
    if (!result.ok()) {
      report.abort_reason = absl::IsResourceExhausted(result.status())
                                ? "budget"
                                : std::string(result.status().message());
      break;
    }
    report.loss_trace.push_back(result->loss);
    ++report.steps;
  }
  if (config.dp_enabled && report.accountant.steps() > 0) {
    PSYN_ASSIGN_OR_RETURN(report.spent,
                          ToEpsilonDelta(report.accountant, config.dp.delta));
  }
  return report;
}

}  // namespace psyn
