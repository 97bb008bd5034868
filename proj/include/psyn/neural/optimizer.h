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

#ifndef PSYN_NEURAL_OPTIMIZER_H_
#define PSYN_NEURAL_OPTIMIZER_H_

#include <cstdint>
#include <string_view>
#include <utility>
#include <variant>

#include "absl/status/statusor.h"
#include "psyn/neural/tensor_list.h"

namespace psyn {

struct SgdConfig {
  double learning_rate = 0.01;
};

struct AdamState {
  GradientSet first_moment;
  GradientSet second_moment;
  int64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState Init(const ParameterSet& params, double learning_rate);
};

// theta <- theta - learning_rate * grad.
absl::StatusOr<ParameterSet> SgdStep(const ParameterSet& params,
                                     const GradientSet& grad,
                                     const SgdConfig& config);

// One bias-corrected Adam update; returns the new parameters and state.
absl::StatusOr<std::pair<ParameterSet, AdamState>> AdamStep(
    const ParameterSet& params, const GradientSet& grad, const AdamState& state);

using OptimizerState = std::variant<SgdConfig, AdamState>;

enum class OptimizerKind { kSgd, kAdam };
std::string_view OptimizerName(OptimizerKind kind);
absl::StatusOr<OptimizerKind> ParseOptimizer(std::string_view name);

OptimizerState MakeOptimizer(OptimizerKind kind, const ParameterSet& params,
                             double learning_rate);

absl::StatusOr<ParameterSet> OptimizerStep(const ParameterSet& params,
                                           const GradientSet& grad,
                                           OptimizerState& state);

}  // namespace psyn

#endif  // PSYN_NEURAL_OPTIMIZER_H_
