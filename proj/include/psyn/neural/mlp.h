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

#ifndef PSYN_NEURAL_MLP_H_
#define PSYN_NEURAL_MLP_H_

#include <Eigen/Dense>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "psyn/common/random.h"
#include "psyn/neural/tensor_list.h"

namespace psyn {

enum class Activation { kRelu, kTanh, kIdentity };

std::string_view ActivationName(Activation activation);
absl::StatusOr<Activation> ParseActivation(std::string_view name);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::kIdentity;
};

// Multilayer perceptron. Rows of an input batch are examples.
struct MlpParams {
  std::vector<DenseLayer> layers;

  int input_width() const { return static_cast<int>(layers.front().weight.cols()); }
  int output_width() const { return static_cast<int>(layers.back().weight.rows()); }

  // Adjacent dimensions chain and every entry is finite.
  absl::Status Validate() const;

  // Weight then bias for each layer, bias as an (out x 1) tensor.
  void AppendTensors(TensorList* out) const;
  // Reads this MLP's tensors starting at `*cursor`, advancing it.
  absl::Status AssignTensors(const TensorList& tensors, size_t* cursor);
  size_t num_tensors() const { return 2 * layers.size(); }
};

// widths = {in, hidden..., out}. Hidden layers use `hidden`, the last layer
// uses `output`. Weights are uniform(-a, a) with a = sqrt(6 / (fan_in +
// fan_out)); biases start at zero.
absl::StatusOr<MlpParams> InitMlp(std::span<const int> widths,
                                  Activation hidden, Activation output,
                                  Rng& rng);

// Activations retained by the forward pass for the backward pass.
struct MlpCache {
  std::vector<Eigen::MatrixXd> inputs;   // input to each layer
  std::vector<Eigen::MatrixXd> outputs;  // post-activation output of each layer
};

absl::StatusOr<Eigen::MatrixXd> MlpApply(const MlpParams& params,
                                         const Eigen::MatrixXd& input,
                                         MlpCache* cache = nullptr);

// Reverse-mode gradients of sum(upstream .* output) with respect to every
// parameter (returned) and to the input (written to `input_grad` if given).
absl::StatusOr<GradientSet> MlpGrads(const MlpParams& params,
                                     const MlpCache& cache,
                                     const Eigen::MatrixXd& upstream,
                                     Eigen::MatrixXd* input_grad = nullptr);

}  // namespace psyn

#endif  // PSYN_NEURAL_MLP_H_
