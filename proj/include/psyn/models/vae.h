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

#ifndef PSYN_MODELS_VAE_H_
#define PSYN_MODELS_VAE_H_

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "psyn/models/generator.h"
#include "psyn/neural/mlp.h"

namespace psyn {

struct VaeConfig {
  int latent_dim = 16;
  std::vector<int> hidden = {128, 128};
  double kl_weight = 1.0;         // beta
  double decoder_variance = 0.25;  // fixed Gaussian variance of continuous heads

  absl::Status Validate() const;
  nlohmann::json ToJson() const;
  // Missing keys keep their defaults.
  static absl::StatusOr<VaeConfig> FromJson(const nlohmann::json& json);
};

// Encoder: [x | one_hot(y)] -> [mu | logvar]. Decoder: [z | one_hot(y)] ->
// one output per encoded slot (a mean for continuous slots, logits for each
// categorical block).
struct VaeParams {
  MlpParams encoder;
  MlpParams decoder;
};

// Batch means of the ELBO terms.
struct VaeLoss {
  double reconstruction = 0.0;
  double kl = 0.0;
  double total = 0.0;  // reconstruction + kl_weight * kl
};

// 0.5 * sum(mu^2 + exp(logvar) - logvar - 1), averaged over rows.
double KlDivergence(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& logvar);

// Conditional variational autoencoder over encoded rows.
class VaeModel final : public GeneratorModel {
 public:
  static absl::StatusOr<VaeModel> Create(EncoderState layout, VaeConfig config,
                                         uint64_t init_seed);

  const VaeConfig& config() const { return config_; }
  const VaeParams& params() const { return params_; }
  VaeParams& mutable_params() { return params_; }

  // Loss with z = mu + exp(logvar / 2) * noise. Gradients of the batch sum
  // go to `grad` when non-null.
  absl::StatusOr<VaeLoss> ForwardLoss(const Eigen::MatrixXd& x,
                                      std::span<const int> labels,
                                      const Eigen::MatrixXd& noise,
                                      GradientSet* grad) const;

  // Objective
  ParameterSet Parameters() const override;
  absl::Status SetParameters(const ParameterSet& params) override;
  int noise_width() const override { return config_.latent_dim; }
  Eigen::MatrixXd DrawNoise(int64_t rows, Rng& rng) const override;
  absl::StatusOr<double> SumLoss(const Eigen::MatrixXd& x,
                                 std::span<const int> labels,
                                 const Eigen::MatrixXd& noise,
                                 GradientSet* grad) const override;

  // GeneratorModel
  ModelKind kind() const override { return ModelKind::kVae; }
  const EncoderState& layout() const override { return layout_; }
  nlohmann::json Hyperparameters() const override { return config_.ToJson(); }
  std::unique_ptr<GeneratorModel> Clone() const override;
  absl::StatusOr<Eigen::MatrixXd> Sample(
      int label, int64_t n, Rng& rng,
      std::vector<int64_t>* clamped = nullptr) const override;

 private:
  VaeModel(EncoderState layout, VaeConfig config, VaeParams params)
      : layout_(std::move(layout)),
        config_(std::move(config)),
        params_(std::move(params)) {}

  EncoderState layout_;
  VaeConfig config_;
  VaeParams params_;
};

}  // namespace psyn

#endif  // PSYN_MODELS_VAE_H_
