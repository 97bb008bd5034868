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

#include "psyn/models/vae.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "psyn/common/status_macros.h"

namespace psyn {
namespace {

absl::Status CheckLabels(std::span<const int> labels, int64_t rows, int num_classes) {
  if (static_cast<int64_t>(labels.size()) != rows) {
    return absl::InvalidArgumentError("label count does not match row count");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      return absl::InvalidArgumentError(absl::StrCat("invalid class index ", y));
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status VaeConfig::Validate() const {
  if (latent_dim < 1) return absl::InvalidArgumentError("latent_dim must be >= 1");
  for (int h : hidden) {
    if (h < 1) return absl::InvalidArgumentError("hidden widths must be positive");
  }
  if (!(kl_weight >= 0.0)) return absl::InvalidArgumentError("kl_weight must be >= 0");
  if (!(decoder_variance > 0.0)) {
    return absl::InvalidArgumentError("decoder_variance must be positive");
  }
  return absl::OkStatus();
}

nlohmann::json VaeConfig::ToJson() const {
  return {{"latent_dim", latent_dim},
          {"hidden", hidden},
          {"kl_weight", kl_weight},
          {"decoder_variance", decoder_variance}};
}

absl::StatusOr<VaeConfig> VaeConfig::FromJson(const nlohmann::json& json) {
  VaeConfig config;
  try {
    for (const auto& [key, value] : json.items()) {
      if (key == "latent_dim") {
        config.latent_dim = value.get<int>();
      } else if (key == "hidden") {
        config.hidden = value.get<std::vector<int>>();
      } else if (key == "kl_weight") {
        config.kl_weight = value.get<double>();
      } else if (key == "decoder_variance") {
        config.decoder_variance = value.get<double>();
      } else {
        return absl::InvalidArgumentError(absl::StrCat("unknown vae key '", key, "'"));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("invalid vae config: ", e.what()));
  }
  PSYN_RETURN_IF_ERROR(config.Validate());
  return config;
}

double KlDivergence(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& logvar) {
  if (mu.rows() == 0) return 0.0;
  const double total =
      0.5 * (mu.array().square() + logvar.array().exp() - logvar.array() - 1.0).sum();
  return total / static_cast<double>(mu.rows());
}

absl::StatusOr<VaeModel> VaeModel::Create(EncoderState layout, VaeConfig config,
                                          uint64_t init_seed) {
  PSYN_RETURN_IF_ERROR(config.Validate());
  const int width = layout.width();
  const int classes = layout.num_classes();
  if (width < 1 || classes < 1) {
    return absl::InvalidArgumentError("VAE needs a non-empty encoded layout");
  }
  Rng rng = Rng::FromSeed(init_seed, "vae/init");
  std::vector<int> encoder_widths = {width + classes};
  encoder_widths.insert(encoder_widths.end(), config.hidden.begin(), config.hidden.end());
  encoder_widths.push_back(2 * config.latent_dim);
  std::vector<int> decoder_widths = {config.latent_dim + classes};
  decoder_widths.insert(decoder_widths.end(), config.hidden.begin(), config.hidden.end());
  decoder_widths.push_back(width);

  VaeParams params;
  PSYN_ASSIGN_OR_RETURN(params.encoder, InitMlp(encoder_widths, Activation::kRelu,
                                                Activation::kIdentity, rng));
  PSYN_ASSIGN_OR_RETURN(params.decoder, InitMlp(decoder_widths, Activation::kRelu,
                                                Activation::kIdentity, rng));
  return VaeModel(std::move(layout), std::move(config), std::move(params));
}

absl::StatusOr<VaeLoss> VaeModel::ForwardLoss(const Eigen::MatrixXd& x,
                                              std::span<const int> labels,
                                              const Eigen::MatrixXd& noise,
                                              GradientSet* grad) const {
  const int64_t n = x.rows();
  const int z_dim = config_.latent_dim;
  const int classes = layout_.num_classes();
  if (x.cols() != layout_.width()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "rows have width ", x.cols(), ", model expects ", layout_.width()));
  }
  if (noise.rows() != n || noise.cols() != z_dim) {
    return absl::InvalidArgumentError("reparameterization noise has the wrong shape");
  }
  PSYN_RETURN_IF_ERROR(CheckLabels(labels, n, classes));
  if (n == 0) {
    if (grad != nullptr) *grad = TensorList::ZerosLike(Parameters());
    return VaeLoss{};
  }

  MlpCache encoder_cache;
  PSYN_ASSIGN_OR_RETURN(
      const Eigen::MatrixXd encoded,
      MlpApply(params_.encoder, AppendOneHot(x, labels, classes), &encoder_cache));
  const Eigen::MatrixXd mu = encoded.leftCols(z_dim);
  const Eigen::MatrixXd logvar = encoded.rightCols(z_dim);
  const Eigen::ArrayXXd stddev = (0.5 * logvar.array()).exp();
  const Eigen::MatrixXd z = (mu.array() + stddev * noise.array()).matrix();

  MlpCache decoder_cache;
  PSYN_ASSIGN_OR_RETURN(
      const Eigen::MatrixXd out,
      MlpApply(params_.decoder, AppendOneHot(z, labels, classes), &decoder_cache));

  double reconstruction = 0.0;
  Eigen::MatrixXd out_grad(n, out.cols());
  for (const ColumnTransform& t : layout_.transforms()) {
    if (t.kind == ColumnKind::kContinuous) {
      const Eigen::ArrayXd diff = (out.col(t.offset) - x.col(t.offset)).array();
      const double head = 0.5 * diff.square().sum() / config_.decoder_variance;
      if (!std::isfinite(head)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "non-finite reconstruction loss in continuous head at slot ", t.offset));
      }
      reconstruction += head;
      out_grad.col(t.offset) = diff.matrix() / config_.decoder_variance;
      continue;
    }
    // Soft-target cross-entropy: -sum_j x_j log softmax(logits)_j.
    const Eigen::MatrixXd logits = out.middleCols(t.offset, t.width);
    const Eigen::MatrixXd target = x.middleCols(t.offset, t.width);
    const Eigen::VectorXd top = logits.rowwise().maxCoeff();
    const Eigen::ArrayXXd shifted = (logits.colwise() - top).array();
    const Eigen::VectorXd log_norm = shifted.exp().rowwise().sum().log().matrix();
    const Eigen::ArrayXXd log_probs = shifted.colwise() - log_norm.array();
    const double head = -(target.array() * log_probs).sum();
    if (!std::isfinite(head)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "non-finite reconstruction loss in categorical head at slot ", t.offset));
    }
    reconstruction += head;
    const Eigen::VectorXd mass = target.rowwise().sum();
    out_grad.middleCols(t.offset, t.width) =
        (log_probs.exp().colwise() * mass.array()).matrix() - target;
  }

  const double kl_sum =
      0.5 * (mu.array().square() + logvar.array().exp() - logvar.array() - 1.0).sum();
  if (!std::isfinite(kl_sum)) {
    return absl::InvalidArgumentError("non-finite KL term in the latent head");
  }
  const double beta = config_.kl_weight;
  VaeLoss loss;
  loss.reconstruction = reconstruction / n;
  loss.kl = kl_sum / n;
  loss.total = (reconstruction + beta * kl_sum) / n;

  if (grad != nullptr) {
    Eigen::MatrixXd decoder_input_grad;
    PSYN_ASSIGN_OR_RETURN(
        GradientSet decoder_grads,
        MlpGrads(params_.decoder, decoder_cache, out_grad, &decoder_input_grad));
    const Eigen::ArrayXXd dz = decoder_input_grad.leftCols(z_dim).array();
    Eigen::MatrixXd encoder_upstream(n, 2 * z_dim);
    encoder_upstream.leftCols(z_dim) = (dz + beta * mu.array()).matrix();
    encoder_upstream.rightCols(z_dim) =
        (dz * noise.array() * 0.5 * stddev + 0.5 * beta * (logvar.array().exp() - 1.0))
            .matrix();
    PSYN_ASSIGN_OR_RETURN(GradientSet encoder_grads,
                          MlpGrads(params_.encoder, encoder_cache, encoder_upstream));
    GradientSet all;
    for (const Eigen::MatrixXd& t : encoder_grads.tensors()) all.push_back(t);
    for (const Eigen::MatrixXd& t : decoder_grads.tensors()) all.push_back(t);
    *grad = std::move(all);
  }
  return loss;
}

ParameterSet VaeModel::Parameters() const {
  ParameterSet params;
  params_.encoder.AppendTensors(&params);
  params_.decoder.AppendTensors(&params);
  return params;
}

absl::Status VaeModel::SetParameters(const ParameterSet& params) {
  if (params.size() != params_.encoder.num_tensors() + params_.decoder.num_tensors()) {
    return absl::InvalidArgumentError("wrong number of VAE tensors");
  }
  VaeParams updated = params_;
  size_t cursor = 0;
  PSYN_RETURN_IF_ERROR(updated.encoder.AssignTensors(params, &cursor));
  PSYN_RETURN_IF_ERROR(updated.decoder.AssignTensors(params, &cursor));
  params_ = std::move(updated);
  return absl::OkStatus();
}

Eigen::MatrixXd VaeModel::DrawNoise(int64_t rows, Rng& rng) const {
  Eigen::MatrixXd noise(rows, config_.latent_dim);
  for (int64_t r = 0; r < rows; ++r) {
    for (int j = 0; j < config_.latent_dim; ++j) noise(r, j) = rng.Normal();
  }
  return noise;
}

absl::StatusOr<double> VaeModel::SumLoss(const Eigen::MatrixXd& x,
                                         std::span<const int> labels,
                                         const Eigen::MatrixXd& noise,
                                         GradientSet* grad) const {
  PSYN_ASSIGN_OR_RETURN(const VaeLoss loss, ForwardLoss(x, labels, noise, grad));
  return loss.total * static_cast<double>(x.rows());
}

std::unique_ptr<GeneratorModel> VaeModel::Clone() const {
  return std::make_unique<VaeModel>(*this);
}

absl::StatusOr<Eigen::MatrixXd> VaeModel::Sample(int label, int64_t n, Rng& rng,
                                                 std::vector<int64_t>* clamped) const {
  if (label < 0 || label >= layout_.num_classes()) {
    return absl::InvalidArgumentError(absl::StrCat("invalid class index ", label));
  }
  if (n < 0) return absl::InvalidArgumentError("sample count must be non-negative");
  if (n == 0) return Eigen::MatrixXd(0, layout_.width());
  const Eigen::MatrixXd z = DrawNoise(n, rng);
  const std::vector<int> labels(n, label);
  PSYN_ASSIGN_OR_RETURN(
      Eigen::MatrixXd out,
      MlpApply(params_.decoder, AppendOneHot(z, labels, layout_.num_classes())));
  ProjectToEncodedDomain(layout_, &out, clamped);
  return out;
}

}  // namespace psyn
