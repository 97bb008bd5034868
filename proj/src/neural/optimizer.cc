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

#include "psyn/neural/optimizer.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "psyn/common/status_macros.h"

namespace psyn {
namespace {

absl::Status CheckGradient(const ParameterSet& params, const GradientSet& grad) {
  if (!params.SameShape(grad)) {
    return absl::InvalidArgumentError("gradient is not shape-congruent with parameters");
  }
  if (!grad.AllFinite()) return absl::InvalidArgumentError("non-finite gradient entries");
  return absl::OkStatus();
}

}  // namespace

AdamState AdamState::Init(const ParameterSet& params, double learning_rate) {
  AdamState state;
  state.first_moment = TensorList::ZerosLike(params);
  state.second_moment = TensorList::ZerosLike(params);
  state.learning_rate = learning_rate;
  return state;
}

absl::StatusOr<ParameterSet> SgdStep(const ParameterSet& params,
                                     const GradientSet& grad,
                                     const SgdConfig& config) {
  PSYN_RETURN_IF_ERROR(CheckGradient(params, grad));
  ParameterSet updated = params;
  updated.AddScaled(grad, -config.learning_rate);
  return updated;
}

absl::StatusOr<std::pair<ParameterSet, AdamState>> AdamStep(
    const ParameterSet& params, const GradientSet& grad, const AdamState& state) {
  PSYN_RETURN_IF_ERROR(CheckGradient(params, grad));
  if (!state.first_moment.SameShape(params) || !state.second_moment.SameShape(params)) {
    return absl::InvalidArgumentError("Adam moments are not shape-congruent");
  }
  AdamState next = state;
  next.step = state.step + 1;
  const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(next.step));
  const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(next.step));
  ParameterSet updated = params;
  for (size_t i = 0; i < params.size(); ++i) {
    next.first_moment[i] = state.beta1 * state.first_moment[i] + (1.0 - state.beta1) * grad[i];
    next.second_moment[i] = state.beta2 * state.second_moment[i] +
                            (1.0 - state.beta2) * grad[i].cwiseProduct(grad[i]);
    const Eigen::ArrayXXd m_hat = next.first_moment[i].array() / correction1;
    const Eigen::ArrayXXd v_hat = next.second_moment[i].array() / correction2;
    updated[i].array() -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
  }
  return std::make_pair(std::move(updated), std::move(next));
}

std::string_view OptimizerName(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

absl::StatusOr<OptimizerKind> ParseOptimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  return absl::InvalidArgumentError(absl::StrCat("unknown optimizer '", std::string(name), "'"));
}

OptimizerState MakeOptimizer(OptimizerKind kind, const ParameterSet& params,
                             double learning_rate) {
  if (kind == OptimizerKind::kSgd) return SgdConfig{learning_rate};
  return AdamState::Init(params, learning_rate);
}

absl::StatusOr<ParameterSet> OptimizerStep(const ParameterSet& params,
                                           const GradientSet& grad,
                                           OptimizerState& state) {
  if (const SgdConfig* sgd = std::get_if<SgdConfig>(&state)) {
    return SgdStep(params, grad, *sgd);
  }
  PSYN_ASSIGN_OR_RETURN(auto result, AdamStep(params, grad, std::get<AdamState>(state)));
  state = std::move(result.second);
  return std::move(result.first);
}

}  // namespace psyn
