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

#include "psyn/neural/mlp.h"

#include <cmath>

#include "absl/strings/str_cat.h"

namespace psyn {
namespace {

void Activate(Activation activation, Eigen::MatrixXd* z) {
  switch (activation) {
    case Activation::kRelu:
      *z = z->cwiseMax(0.0);
      break;
    case Activation::kTanh:
      *z = z->array().tanh().matrix();
      break;
    case Activation::kIdentity:
      break;
  }
}

// Multiplies `grad` in place by the activation derivative, expressed through
// the post-activation output.
void ScaleByDerivative(Activation activation, const Eigen::MatrixXd& output,
                       Eigen::MatrixXd* grad) {
  switch (activation) {
    case Activation::kRelu:
      *grad = (output.array() > 0.0).select(grad->array(), 0.0).matrix();
      break;
    case Activation::kTanh:
      grad->array() *= 1.0 - output.array().square();
      break;
    case Activation::kIdentity:
      break;
  }
}

}  // namespace

std::string_view ActivationName(Activation activation) {
  switch (activation) {
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kIdentity:
      return "identity";
  }
  return "identity";
}

absl::StatusOr<Activation> ParseActivation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  return absl::InvalidArgumentError(absl::StrCat("unknown activation '", std::string(name), "'"));
}

absl::Status MlpParams::Validate() const {
  if (layers.empty()) return absl::InvalidArgumentError("MLP has no layers");
  for (size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    if (layer.bias.size() != layer.weight.rows()) {
      return absl::InvalidArgumentError(
          absl::StrCat("layer ", l, ": bias size does not match weight rows"));
    }
    if (l > 0 && layer.weight.cols() != layers[l - 1].weight.rows()) {
      return absl::InvalidArgumentError(
          absl::StrCat("layer ", l, ": input width does not chain"));
    }
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
      return absl::InvalidArgumentError(
          absl::StrCat("layer ", l, ": non-finite parameters"));
    }
  }
  return absl::OkStatus();
}

void MlpParams::AppendTensors(TensorList* out) const {
  for (const DenseLayer& layer : layers) {
    out->push_back(layer.weight);
    out->push_back(layer.bias);
  }
}

absl::Status MlpParams::AssignTensors(const TensorList& tensors, size_t* cursor) {
  if (*cursor + num_tensors() > tensors.size()) {
    return absl::InvalidArgumentError("too few tensors for MLP");
  }
  for (DenseLayer& layer : layers) {
    const Eigen::MatrixXd& weight = tensors[(*cursor)++];
    const Eigen::MatrixXd& bias = tensors[(*cursor)++];
    if (weight.rows() != layer.weight.rows() ||
        weight.cols() != layer.weight.cols() ||
        bias.rows() != layer.bias.size() || bias.cols() != 1) {
      return absl::InvalidArgumentError("tensor shape does not match MLP layer");
    }
    layer.weight = weight;
    layer.bias = bias.col(0);
  }
  return absl::OkStatus();
}

absl::StatusOr<MlpParams> InitMlp(std::span<const int> widths,
                                  Activation hidden, Activation output,
                                  Rng& rng) {
  if (widths.size() < 2) {
    return absl::InvalidArgumentError("an MLP needs at least input and output widths");
  }
  MlpParams params;
  for (size_t l = 0; l + 1 < widths.size(); ++l) {
    const int fan_in = widths[l];
    const int fan_out = widths[l + 1];
    if (fan_in < 1 || fan_out < 1) {
      return absl::InvalidArgumentError("layer widths must be positive");
    }
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    DenseLayer layer;
    layer.weight.resize(fan_out, fan_in);
    for (int j = 0; j < fan_in; ++j) {
      for (int i = 0; i < fan_out; ++i) {
        layer.weight(i, j) = a * (2.0 * rng.Uniform() - 1.0);
      }
    }
    layer.bias = Eigen::VectorXd::Zero(fan_out);
    layer.activation = (l + 2 == widths.size()) ? output : hidden;
    params.layers.push_back(std::move(layer));
  }
  return params;
}

absl::StatusOr<Eigen::MatrixXd> MlpApply(const MlpParams& params,
                                         const Eigen::MatrixXd& input,
                                         MlpCache* cache) {
  if (params.layers.empty()) return absl::InvalidArgumentError("MLP has no layers");
  if (input.cols() != params.input_width()) {
    return absl::InvalidArgumentError(
        absl::StrCat("input width ", input.cols(), " does not match MLP input ",
                     params.input_width()));
  }
  if (!input.allFinite()) return absl::InvalidArgumentError("non-finite MLP input");
  if (cache != nullptr) {
    cache->inputs.clear();
    cache->outputs.clear();
  }
  Eigen::MatrixXd current = input;
  for (const DenseLayer& layer : params.layers) {
    Eigen::MatrixXd z = current * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    Activate(layer.activation, &z);
    if (cache != nullptr) cache->inputs.push_back(std::move(current));
    current = std::move(z);
    if (cache != nullptr) cache->outputs.push_back(current);
  }
  return current;
}

absl::StatusOr<GradientSet> MlpGrads(const MlpParams& params,
                                     const MlpCache& cache,
                                     const Eigen::MatrixXd& upstream,
                                     Eigen::MatrixXd* input_grad) {
  const size_t num_layers = params.layers.size();
  if (cache.inputs.size() != num_layers || cache.outputs.size() != num_layers) {
    return absl::InvalidArgumentError("MLP cache does not match the network");
  }
  if (upstream.rows() != cache.outputs.back().rows() ||
      upstream.cols() != cache.outputs.back().cols()) {
    return absl::InvalidArgumentError("upstream gradient shape mismatch");
  }
  std::vector<Eigen::MatrixXd> tensors(2 * num_layers);
  Eigen::MatrixXd delta = upstream;
  for (size_t l = num_layers; l-- > 0;) {
    const DenseLayer& layer = params.layers[l];
    ScaleByDerivative(layer.activation, cache.outputs[l], &delta);
    tensors[2 * l] = delta.transpose() * cache.inputs[l];
    tensors[2 * l + 1] = delta.colwise().sum().transpose();
    if (l > 0 || input_grad != nullptr) {
      Eigen::MatrixXd next = delta * layer.weight;
      delta = std::move(next);
    }
  }
  if (input_grad != nullptr) *input_grad = std::move(delta);
  return GradientSet(std::move(tensors));
}

}  // namespace psyn
