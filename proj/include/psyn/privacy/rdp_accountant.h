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

#ifndef PSYN_PRIVACY_RDP_ACCOUNTANT_H_
#define PSYN_PRIVACY_RDP_ACCOUNTANT_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"

namespace psyn {

// Integer Renyi orders 2..64.
std::vector<int> DefaultAlphaGrid();

struct DpConfig {
  double noise_multiplier = 1.0;  // sigma
  double clip_norm = 1.0;         // C; +infinity disables clipping
  double sampling_rate = 0.01;    // q
  double delta = 1e-5;
  std::vector<int> alpha_grid = DefaultAlphaGrid();
  std::optional<double> epsilon_budget;

  absl::Status Validate() const;
};

// RDP of order `alpha` for one step of the Poisson-subsampled Gaussian
// mechanism with sampling rate q and noise multiplier sigma:
//
//   q = 1:     alpha / (2 sigma^2)
//   0 < q < 1: log(sum_k C(alpha,k) (1-q)^(alpha-k) q^k exp(k(k-1)/(2 sigma^2)))
//              / (alpha - 1)
//   q = 0:     0
//
// The binomial sum is evaluated with log-sum-exp.
absl::StatusOr<double> RdpStepCost(double q, double sigma, int alpha);

// Cumulative RDP over a fixed grid of orders.
class AccountantState {
 public:
  explicit AccountantState(std::vector<int> alphas = DefaultAlphaGrid());

  int64_t steps() const { return steps_; }
  const std::vector<int>& alphas() const { return alphas_; }
  const std::vector<double>& rdp() const { return rdp_; }

  nlohmann::json ToJson() const;
  static absl::StatusOr<AccountantState> FromJson(const nlohmann::json& json);

  friend bool operator==(const AccountantState&, const AccountantState&) = default;

 private:
  friend absl::StatusOr<AccountantState> Compose(const AccountantState& state,
                                                 int64_t steps, double q,
                                                 double sigma);

  std::vector<int> alphas_;
  std::vector<double> rdp_;
  int64_t steps_ = 0;
};

// Linear composition: rdp(alpha) += steps * RdpStepCost(q, sigma, alpha).
absl::StatusOr<AccountantState> Compose(const AccountantState& state,
                                        int64_t steps, double q, double sigma);

struct EpsilonDelta {
  double epsilon = 0.0;
  double delta = 0.0;
  int alpha = 0;  // minimizing order
};

// epsilon = min over alpha of rdp(alpha) + log(1/delta) / (alpha - 1).
absl::StatusOr<EpsilonDelta> ToEpsilonDelta(const AccountantState& state,
                                            double delta);

// Largest T with ToEpsilonDelta(Compose(empty, T)).epsilon <= budget, or 0
// when a single step already exceeds it.
absl::StatusOr<int64_t> MaxStepsWithinBudget(const DpConfig& config);

}  // namespace psyn

#endif  // PSYN_PRIVACY_RDP_ACCOUNTANT_H_
