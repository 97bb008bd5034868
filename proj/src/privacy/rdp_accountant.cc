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

#include "psyn/privacy/rdp_accountant.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "psyn/common/status_macros.h"

namespace psyn {
namespace {

// Steps beyond this are treated as unbounded when planning a budget.
constexpr int64_t kMaxPlannedSteps = int64_t{1} << 40;

double LogBinomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

std::vector<int> DefaultAlphaGrid() {
  std::vector<int> grid;
  for (int alpha = 2; alpha <= 64; ++alpha) grid.push_back(alpha);
  return grid;
}

absl::Status DpConfig::Validate() const {
  if (!(noise_multiplier > 0.0) || !std::isfinite(noise_multiplier)) {
    return absl::InvalidArgumentError("noise multiplier must be positive and finite");
  }
  if (!(clip_norm > 0.0)) return absl::InvalidArgumentError("clip norm must be positive");
  if (!(sampling_rate > 0.0 && sampling_rate <= 1.0)) {
    return absl::InvalidArgumentError("sampling rate must lie in (0, 1]");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  if (alpha_grid.empty() || !std::is_sorted(alpha_grid.begin(), alpha_grid.end()) ||
      alpha_grid.front() < 2) {
    return absl::InvalidArgumentError("alpha grid must be sorted with every order >= 2");
  }
  if (epsilon_budget.has_value() && !(*epsilon_budget > 0.0)) {
    return absl::InvalidArgumentError("epsilon budget must be positive");
  }
  return absl::OkStatus();
}

absl::StatusOr<double> RdpStepCost(double q, double sigma, int alpha) {
  if (alpha < 2) {
    return absl::InvalidArgumentError(absl::StrCat("RDP order must be >= 2, got ", alpha));
  }
  if (!(sigma > 0.0)) return absl::InvalidArgumentError("sigma must be positive");
  if (!(q >= 0.0 && q <= 1.0)) return absl::InvalidArgumentError("q must lie in [0, 1]");
  if (q == 0.0) return 0.0;
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  if (q == 1.0) return alpha * inv_two_var;

  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  std::vector<double> terms(alpha + 1);
  for (int k = 0; k <= alpha; ++k) {
    terms[k] = LogBinomial(alpha, k) + (alpha - k) * log_1mq + k * log_q +
               static_cast<double>(k) * (k - 1) * inv_two_var;
  }
  const double top = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  const double cost = (top + std::log(sum)) / (alpha - 1);
  if (!std::isfinite(cost)) {
    return absl::OutOfRangeError(absl::StrCat(
        "RDP cost overflowed for q=", q, ", sigma=", sigma, ", alpha=", alpha));
  }
  return std::max(cost, 0.0);
}

AccountantState::AccountantState(std::vector<int> alphas)
    : alphas_(std::move(alphas)), rdp_(alphas_.size(), 0.0) {}

nlohmann::json AccountantState::ToJson() const {
  return {{"steps", steps_}, {"alphas", alphas_}, {"rdp", rdp_}};
}

absl::StatusOr<AccountantState> AccountantState::FromJson(const nlohmann::json& json) {
  try {
    AccountantState state(json.at("alphas").get<std::vector<int>>());
    state.rdp_ = json.at("rdp").get<std::vector<double>>();
    state.steps_ = json.at("steps").get<int64_t>();
    if (state.rdp_.size() != state.alphas_.size()) {
      return absl::InvalidArgumentError("accountant RDP table does not match its orders");
    }
    return state;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed accountant state: ", e.what()));
  }
}

absl::StatusOr<AccountantState> Compose(const AccountantState& state,
                                        int64_t steps, double q, double sigma) {
  if (steps < 0) return absl::InvalidArgumentError("steps must be non-negative");
  AccountantState next = state;
  if (steps == 0) return next;
  for (size_t i = 0; i < state.alphas_.size(); ++i) {
    PSYN_ASSIGN_OR_RETURN(const double cost, RdpStepCost(q, sigma, state.alphas_[i]));
    next.rdp_[i] += static_cast<double>(steps) * cost;
    if (!std::isfinite(next.rdp_[i])) {
      return absl::OutOfRangeError("cumulative RDP overflowed");
    }
  }
  next.steps_ += steps;
  return next;
}

absl::StatusOr<EpsilonDelta> ToEpsilonDelta(const AccountantState& state,
                                            double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  if (state.alphas().empty()) return absl::InvalidArgumentError("empty accountant");
  EpsilonDelta best{std::numeric_limits<double>::infinity(), delta, 0};
  const double log_inv_delta = -std::log(delta);
  for (size_t i = 0; i < state.alphas().size(); ++i) {
    const int alpha = state.alphas()[i];
    const double epsilon = state.rdp()[i] + log_inv_delta / (alpha - 1);
    if (epsilon < best.epsilon) {
      best.epsilon = epsilon;
      best.alpha = alpha;
    }
  }
  best.epsilon = std::max(best.epsilon, 0.0);
  return best;
}

absl::StatusOr<int64_t> MaxStepsWithinBudget(const DpConfig& config) {
  PSYN_RETURN_IF_ERROR(config.Validate());
  if (!config.epsilon_budget.has_value()) {
    return absl::InvalidArgumentError("no epsilon budget configured");
  }
  const double budget = *config.epsilon_budget;
  const AccountantState empty(config.alpha_grid);
  auto within = [&](int64_t steps) -> absl::StatusOr<bool> {
    PSYN_ASSIGN_OR_RETURN(AccountantState composed,
                          Compose(empty, steps, config.sampling_rate,
                                  config.noise_multiplier));
    PSYN_ASSIGN_OR_RETURN(EpsilonDelta spent, ToEpsilonDelta(composed, config.delta));
    return spent.epsilon <= budget;
  };
  PSYN_ASSIGN_OR_RETURN(bool one_ok, within(1));
  if (!one_ok) return 0;
  // Exponential search for an upper bound, then bisection on [lo, hi).
  int64_t lo = 1;
  int64_t hi = 2;
  while (true) {
    PSYN_ASSIGN_OR_RETURN(bool ok, within(hi));
    if (!ok) break;
    lo = hi;
    if (hi >= kMaxPlannedSteps) return kMaxPlannedSteps;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const int64_t mid = lo + (hi - lo) / 2;
    PSYN_ASSIGN_OR_RETURN(bool ok, within(mid));
    (ok ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace psyn
