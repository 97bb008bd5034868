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

#ifndef PSYN_MODELS_DDPM_H_
#define PSYN_MODELS_DDPM_H_

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "psyn/models/generator.h"
#include "psyn/neural/mlp.h"

namespace psyn {

// Variance schedule of the forward noising process. Timesteps are 1-based:
// beta(t), alpha(t) = 1 - beta(t) and alpha_bar(t) = prod_{s<=t} alpha(s) for
// t in [1, T], with alpha_bar(0) = 1.
class NoiseSchedule {
 public:
  // Linear betas from beta_start to beta_end inclusive; T = 1 uses beta_start.
  static absl::StatusOr<NoiseSchedule> Linear(int steps, double beta_start = 1e-4,
                                              double beta_end = 0.02);
  static absl::StatusOr<NoiseSchedule> FromBetas(std::vector<double> betas);

  int steps() const { return static_cast<int>(betas_.size()); }
  double beta(int t) const { return betas_[t - 1]; }
  double alpha(int t) const { return 1.0 - betas_[t - 1]; }
  double alpha_bar(int t) const { return alpha_bars_[t]; }

 private:
  explicit NoiseSchedule(std::vector<double> betas);

  std::vector<double> betas_;
  std::vector<double> alpha_bars_;
};

// x_t = sqrt(alpha_bar(t)) x0 + sqrt(1 - alpha_bar(t)) eps, with one
// timestep per row.
absl::StatusOr<Eigen::MatrixXd> QSample(const Eigen::MatrixXd& x0,
                                        std::span<const int> timesteps,
                                        const Eigen::MatrixXd& eps,
                                        const NoiseSchedule& schedule);

// [sin(t f_0) .. sin(t f_{d/2-1}) | cos(t f_0) .. cos(t f_{d/2-1})] with
// f_i = 10000^(-i / (d/2)), one row per timestep.
Eigen::MatrixXd TimestepEmbedding(std::span<const int> timesteps, int dim);

// Predicts the injected noise from (x_t, t, y).
using Denoiser = std::function<absl::StatusOr<Eigen::MatrixXd>(
    const Eigen::MatrixXd& x_t, std::span<const int> timesteps,
    std::span<const int> labels)>;

// Sum over rows of ||denoiser(x_t, t, y) - eps||^2. Noise row layout is
// [t, eps_1 .. eps_W].
absl::StatusOr<double> DdpmSumLoss(const Denoiser& denoiser, const Eigen::MatrixXd& x0,
                                   std::span<const int> labels,
                                   const Eigen::MatrixXd& noise,
                                   const NoiseSchedule& schedule);

// Ancestral sampling from x_T ~ N(0, I), without any post-processing.
absl::StatusOr<Eigen::MatrixXd> DdpmSampleRaw(const Denoiser& denoiser,
                                              const NoiseSchedule& schedule,
                                              int width, std::span<const int> labels,
                                              Rng& rng);

struct DdpmConfig {
  int timesteps = 200;
  std::vector<int> hidden = {256, 256};
  int embedding_dim = 32;
  double beta_start = 1e-4;
  double beta_end = 0.02;

  absl::Status Validate() const;
  nlohmann::json ToJson() const;
  static absl::StatusOr<DdpmConfig> FromJson(const nlohmann::json& json);
};

// Conditional DDPM whose denoiser is an MLP over
// [x_t | embedding(t) | one_hot(y)]. Categorical blocks are diffused as real
// vectors and snapped to one-hot only after sampling.
class DdpmModel final : public GeneratorModel {
 public:
  static absl::StatusOr<DdpmModel> Create(EncoderState layout, DdpmConfig config,
                                          uint64_t init_seed);

  const DdpmConfig& config() const { return config_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  const MlpParams& denoiser_params() const { return denoiser_; }
  MlpParams& mutable_denoiser_params() { return denoiser_; }

  absl::StatusOr<Eigen::MatrixXd> PredictNoise(const Eigen::MatrixXd& x_t,
                                               std::span<const int> timesteps,
                                               std::span<const int> labels,
                                               MlpCache* cache = nullptr) const;
  Denoiser AsDenoiser() const;

  // Objective
  ParameterSet Parameters() const override;
  absl::Status SetParameters(const ParameterSet& params) override;
  int noise_width() const override { return 1 + layout_.width(); }
  Eigen::MatrixXd DrawNoise(int64_t rows, Rng& rng) const override;
  absl::StatusOr<double> SumLoss(const Eigen::MatrixXd& x,
                                 std::span<const int> labels,
                                 const Eigen::MatrixXd& noise,
                                 GradientSet* grad) const override;

  // GeneratorModel
  ModelKind kind() const override { return ModelKind::kDdpm; }
  const EncoderState& layout() const override { return layout_; }
  nlohmann::json Hyperparameters() const override { return config_.ToJson(); }
  std::unique_ptr<GeneratorModel> Clone() const override;
  absl::StatusOr<Eigen::MatrixXd> Sample(
      int label, int64_t n, Rng& rng,
      std::vector<int64_t>* clamped = nullptr) const override;

 private:
  DdpmModel(EncoderState layout, DdpmConfig config, NoiseSchedule schedule,
            MlpParams denoiser)
      : layout_(std::move(layout)),
        config_(std::move(config)),
        schedule_(std::move(schedule)),
        denoiser_(std::move(denoiser)) {}

  EncoderState layout_;
  DdpmConfig config_;
  NoiseSchedule schedule_;
  MlpParams denoiser_;
};

}  // namespace psyn

#endif  // PSYN_MODELS_DDPM_H_
