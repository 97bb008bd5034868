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

#include "psyn/models/ddpm.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "psyn/common/status_macros.h"

namespace psyn {
namespace {

absl::Status CheckTimesteps(std::span<const int> timesteps, int steps) {
  for (int t : timesteps) {
    if (t < 1 || t > steps) {
      return absl::InvalidArgumentError(
          absl::StrCat("timestep ", t, " outside [1, ", steps, "]"));
    }
  }
  return absl::OkStatus();
}

std::vector<int> TimestepsFromNoise(const Eigen::MatrixXd& noise) {
  std::vector<int> timesteps(noise.rows());
  for (Eigen::Index r = 0; r < noise.rows(); ++r) {
    timesteps[r] = static_cast<int>(std::lround(noise(r, 0)));
  }
  return timesteps;
}

}  // namespace

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
  alpha_bars_.assign(betas_.size() + 1, 1.0);
  for (size_t t = 1; t <= betas_.size(); ++t) {
    alpha_bars_[t] = alpha_bars_[t - 1] * (1.0 - betas_[t - 1]);
  }
}

absl::StatusOr<NoiseSchedule> NoiseSchedule::Linear(int steps, double beta_start,
                                                    double beta_end) {
  if (steps < 1) {
    return absl::InvalidArgumentError(absl::StrCat("schedule needs T >= 1, got ", steps));
  }
  std::vector<double> betas(steps);
  for (int i = 0; i < steps; ++i) {
    betas[i] = steps == 1 ? beta_start
                          : beta_start + (beta_end - beta_start) * i / (steps - 1);
  }
  return FromBetas(std::move(betas));
}

absl::StatusOr<NoiseSchedule> NoiseSchedule::FromBetas(std::vector<double> betas) {
  if (betas.empty()) return absl::InvalidArgumentError("schedule needs T >= 1");
  for (double beta : betas) {
    if (!(beta > 0.0 && beta < 1.0)) {
      return absl::InvalidArgumentError("every beta must lie in (0, 1)");
    }
  }
  return NoiseSchedule(std::move(betas));
}

absl::StatusOr<Eigen::MatrixXd> QSample(const Eigen::MatrixXd& x0,
                                        std::span<const int> timesteps,
                                        const Eigen::MatrixXd& eps,
                                        const NoiseSchedule& schedule) {
  if (eps.rows() != x0.rows() || eps.cols() != x0.cols() ||
      static_cast<Eigen::Index>(timesteps.size()) != x0.rows()) {
    return absl::InvalidArgumentError("q_sample shape mismatch");
  }
  PSYN_RETURN_IF_ERROR(CheckTimesteps(timesteps, schedule.steps()));
  Eigen::MatrixXd x_t(x0.rows(), x0.cols());
  for (Eigen::Index r = 0; r < x0.rows(); ++r) {
    const double a_bar = schedule.alpha_bar(timesteps[r]);
    x_t.row(r) = std::sqrt(a_bar) * x0.row(r) + std::sqrt(1.0 - a_bar) * eps.row(r);
  }
  return x_t;
}

Eigen::MatrixXd TimestepEmbedding(std::span<const int> timesteps, int dim) {
  const int half = dim / 2;
  Eigen::MatrixXd embedding = Eigen::MatrixXd::Zero(timesteps.size(), dim);
  for (size_t r = 0; r < timesteps.size(); ++r) {
    for (int i = 0; i < half; ++i) {
      const double frequency = std::exp(-std::log(10000.0) * i / half);
      embedding(r, i) = std::sin(timesteps[r] * frequency);
      embedding(r, half + i) = std::cos(timesteps[r] * frequency);
    }
  }
  return embedding;
}

absl::StatusOr<double> DdpmSumLoss(const Denoiser& denoiser, const Eigen::MatrixXd& x0,
                                   std::span<const int> labels,
                                   const Eigen::MatrixXd& noise,
                                   const NoiseSchedule& schedule) {
  if (noise.rows() != x0.rows() || noise.cols() != x0.cols() + 1) {
    return absl::InvalidArgumentError("diffusion noise has the wrong shape");
  }
  const std::vector<int> timesteps = TimestepsFromNoise(noise);
  const Eigen::MatrixXd eps = noise.rightCols(x0.cols());
  PSYN_ASSIGN_OR_RETURN(const Eigen::MatrixXd x_t, QSample(x0, timesteps, eps, schedule));
  PSYN_ASSIGN_OR_RETURN(const Eigen::MatrixXd predicted, denoiser(x_t, timesteps, labels));
  const double loss = (predicted - eps).squaredNorm();
  if (!std::isfinite(loss)) return absl::InvalidArgumentError("non-finite diffusion loss");
  return loss;
}

absl::StatusOr<Eigen::MatrixXd> DdpmSampleRaw(const Denoiser& denoiser,
                                              const NoiseSchedule& schedule,
                                              int width, std::span<const int> labels,
                                              Rng& rng) {
  const Eigen::Index n = static_cast<Eigen::Index>(labels.size());
  Eigen::MatrixXd x(n, width);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (int j = 0; j < width; ++j) x(r, j) = rng.Normal();
  }
  std::vector<int> timesteps(n);
  for (int t = schedule.steps(); t >= 1; --t) {
    std::fill(timesteps.begin(), timesteps.end(), t);
    PSYN_ASSIGN_OR_RETURN(const Eigen::MatrixXd eps_hat, denoiser(x, timesteps, labels));
    const double coefficient = schedule.beta(t) / std::sqrt(1.0 - schedule.alpha_bar(t));
    x = (x - coefficient * eps_hat) / std::sqrt(schedule.alpha(t));
    if (t > 1) {
      const double sigma = std::sqrt(schedule.beta(t));
      for (Eigen::Index r = 0; r < n; ++r) {
        for (int j = 0; j < width; ++j) x(r, j) += sigma * rng.Normal();
      }
    }
  }
  return x;
}

absl::Status DdpmConfig::Validate() const {
  if (timesteps < 1) return absl::InvalidArgumentError("timesteps must be >= 1");
  for (int h : hidden) {
    if (h < 1) return absl::InvalidArgumentError("hidden widths must be positive");
  }
  if (embedding_dim < 2 || embedding_dim % 2 != 0) {
    return absl::InvalidArgumentError("embedding_dim must be a positive even number");
  }
  if (!(beta_start > 0.0 && beta_end < 1.0 && beta_start <= beta_end)) {
    return absl::InvalidArgumentError("need 0 < beta_start <= beta_end < 1");
  }
  return absl::OkStatus();
}

nlohmann::json DdpmConfig::ToJson() const {
  return {{"timesteps", timesteps},
          {"hidden", hidden},
          {"embedding_dim", embedding_dim},
          {"beta_start", beta_start},
          {"beta_end", beta_end}};
}

absl::StatusOr<DdpmConfig> DdpmConfig::FromJson(const nlohmann::json& json) {
  DdpmConfig config;
  try {
    for (const auto& [key, value] : json.items()) {
      if (key == "timesteps") {
        config.timesteps = value.get<int>();
      } else if (key == "hidden") {
        config.hidden = value.get<std::vector<int>>();
      } else if (key == "embedding_dim") {
        config.embedding_dim = value.get<int>();
      } else if (key == "beta_start") {
        config.beta_start = value.get<double>();
      } else if (key == "beta_end") {
        config.beta_end = value.get<double>();
      } else {
        return absl::InvalidArgumentError(absl::StrCat("unknown ddpm key '", key, "'"));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("invalid ddpm config: ", e.what()));
  }
  PSYN_RETURN_IF_ERROR(config.Validate());
  return config;
}

absl::StatusOr<DdpmModel> DdpmModel::Create(EncoderState layout, DdpmConfig config,
                                            uint64_t init_seed) {
  PSYN_RETURN_IF_ERROR(config.Validate());
  if (layout.width() < 1 || layout.num_classes() < 1) {
    return absl::InvalidArgumentError("DDPM needs a non-empty encoded layout");
  }
  PSYN_ASSIGN_OR_RETURN(NoiseSchedule schedule,
                        NoiseSchedule::Linear(config.timesteps, config.beta_start,
                                              config.beta_end));
  Rng rng = Rng::FromSeed(init_seed, "ddpm/init");
  std::vector<int> widths = {layout.width() + config.embedding_dim + layout.num_classes()};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(layout.width());
  PSYN_ASSIGN_OR_RETURN(MlpParams denoiser,
                        InitMlp(widths, Activation::kRelu, Activation::kIdentity, rng));
  return DdpmModel(std::move(layout), std::move(config), std::move(schedule),
                   std::move(denoiser));
}

absl::StatusOr<Eigen::MatrixXd> DdpmModel::PredictNoise(const Eigen::MatrixXd& x_t,
                                                        std::span<const int> timesteps,
                                                        std::span<const int> labels,
                                                        MlpCache* cache) const {
  const Eigen::Index n = x_t.rows();
  const int width = layout_.width();
  const int classes = layout_.num_classes();
  if (x_t.cols() != width) {
    return absl::InvalidArgumentError(absl::StrCat(
        "rows have width ", x_t.cols(), ", model expects ", width));
  }
  if (static_cast<Eigen::Index>(labels.size()) != n ||
      static_cast<Eigen::Index>(timesteps.size()) != n) {
    return absl::InvalidArgumentError("label/timestep count does not match row count");
  }
  PSYN_RETURN_IF_ERROR(CheckTimesteps(timesteps, schedule_.steps()));
  Eigen::MatrixXd input = Eigen::MatrixXd::Zero(n, width + config_.embedding_dim + classes);
  input.leftCols(width) = x_t;
  input.middleCols(width, config_.embedding_dim) =
      TimestepEmbedding(timesteps, config_.embedding_dim);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (labels[r] < 0 || labels[r] >= classes) {
      return absl::InvalidArgumentError(absl::StrCat("invalid class index ", labels[r]));
    }
    input(r, width + config_.embedding_dim + labels[r]) = 1.0;
  }
  return MlpApply(denoiser_, input, cache);
}

Denoiser DdpmModel::AsDenoiser() const {
  return [this](const Eigen::MatrixXd& x_t, std::span<const int> timesteps,
                std::span<const int> labels) {
    return PredictNoise(x_t, timesteps, labels);
  };
}

ParameterSet DdpmModel::Parameters() const {
  ParameterSet params;
  denoiser_.AppendTensors(&params);
  return params;
}

absl::Status DdpmModel::SetParameters(const ParameterSet& params) {
  if (params.size() != denoiser_.num_tensors()) {
    return absl::InvalidArgumentError("wrong number of DDPM tensors");
  }
  MlpParams updated = denoiser_;
  size_t cursor = 0;
  PSYN_RETURN_IF_ERROR(updated.AssignTensors(params, &cursor));
  denoiser_ = std::move(updated);
  return absl::OkStatus();
}

Eigen::MatrixXd DdpmModel::DrawNoise(int64_t rows, Rng& rng) const {
  const int width = layout_.width();
  Eigen::MatrixXd noise(rows, 1 + width);
  for (int64_t r = 0; r < rows; ++r) {
    noise(r, 0) = 1.0 + static_cast<double>(rng.UniformInt(schedule_.steps()));
    for (int j = 0; j < width; ++j) noise(r, 1 + j) = rng.Normal();
  }
  return noise;
}

absl::StatusOr<double> DdpmModel::SumLoss(const Eigen::MatrixXd& x,
                                          std::span<const int> labels,
                                          const Eigen::MatrixXd& noise,
                                          GradientSet* grad) const {
  if (grad == nullptr) return DdpmSumLoss(AsDenoiser(), x, labels, noise, schedule_);
  if (noise.rows() != x.rows() || noise.cols() != x.cols() + 1) {
    return absl::InvalidArgumentError("diffusion noise has the wrong shape");
  }
  const std::vector<int> timesteps = TimestepsFromNoise(noise);
  const Eigen::MatrixXd eps = noise.rightCols(x.cols());
  PSYN_ASSIGN_OR_RETURN(const Eigen::MatrixXd x_t, QSample(x, timesteps, eps, schedule_));
  MlpCache cache;
  PSYN_ASSIGN_OR_RETURN(const Eigen::MatrixXd predicted,
                        PredictNoise(x_t, timesteps, labels, &cache));
  const Eigen::MatrixXd residual = predicted - eps;
  const double loss = residual.squaredNorm();
  if (!std::isfinite(loss)) return absl::InvalidArgumentError("non-finite diffusion loss");
  PSYN_ASSIGN_OR_RETURN(*grad, MlpGrads(denoiser_, cache, 2.0 * residual));
  return loss;
}

std::unique_ptr<GeneratorModel> DdpmModel::Clone() const {
  return std::make_unique<DdpmModel>(*this);
}

absl::StatusOr<Eigen::MatrixXd> DdpmModel::Sample(int label, int64_t n, Rng& rng,
                                                  std::vector<int64_t>* clamped) const {
  if (label < 0 || label >= layout_.num_classes()) {
    return absl::InvalidArgumentError(absl::StrCat("invalid class index ", label));
  }
  if (n < 0) return absl::InvalidArgumentError("sample count must be non-negative");
  if (n == 0) return Eigen::MatrixXd(0, layout_.width());
  const std::vector<int> labels(n, label);
  PSYN_ASSIGN_OR_RETURN(Eigen::MatrixXd rows,
                        DdpmSampleRaw(AsDenoiser(), schedule_, layout_.width(), labels, rng));
  ProjectToEncodedDomain(layout_, &rows, clamped);
  return rows;
}

}  // namespace psyn
