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


#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "oracles.h"
#include "psyn/privacy/rdp_accountant.h"

namespace psyn {
namespace {

double EpsilonOf(int64_t steps, double q, double sigma, double delta) {
  AccountantState state = *Compose(AccountantState(), steps, q, sigma);
  return ToEpsilonDelta(state, delta)->epsilon;
}

TEST(RdpStepCostTest, FullBatchClosedForm) {
  for (double sigma : {0.5, 1.0, 2.0, 5.0}) {
    for (int alpha = 2; alpha <= 64; ++alpha) {
      EXPECT_NEAR(*RdpStepCost(1.0, sigma, alpha), alpha / (2.0 * sigma * sigma), 1e-12);
    }
  }
  EXPECT_EQ(*RdpStepCost(1.0, 1.0, 2), 1.0);
}

TEST(RdpStepCostTest, OrderTwoMatchesThreeTermSum) {
  for (double q : {1e-4, 0.01, 0.1, 0.5, 0.9}) {
    for (double sigma : {0.5, 0.8, 1.0, 2.0, 5.0}) {
      EXPECT_NEAR(*RdpStepCost(q, sigma, 2), oracle::SampledGaussianRdpOrder2(q, sigma), 1e-12)
          << q << " " << sigma;
    }
  }
}

TEST(RdpStepCostTest, ZeroRateAndErrors) {
  EXPECT_EQ(*RdpStepCost(0.0, 1.0, 8), 0.0);
  EXPECT_FALSE(RdpStepCost(0.1, 1.0, 1).ok());
  EXPECT_FALSE(RdpStepCost(0.1, 0.0, 2).ok());
  EXPECT_FALSE(RdpStepCost(1.5, 1.0, 2).ok());
}

TEST(RdpStepCostTest, MonotoneInSigmaAndRate) {
  for (int alpha : {2, 5, 16, 64}) {
    double previous = INFINITY;
    for (double sigma = 0.5; sigma <= 10.0; sigma += 0.5) {
      const double cost = *RdpStepCost(0.01, sigma, alpha);
      EXPECT_GE(cost, 0.0);
      EXPECT_TRUE(std::isfinite(cost));
      EXPECT_LE(cost, previous);
      previous = cost;
    }
    previous = 0.0;
    for (double q : {1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0}) {
      const double cost = *RdpStepCost(q, 1.0, alpha);
      EXPECT_GE(cost, previous);
      previous = cost;
    }
  }
}

TEST(ComposeTest, IdentityAdditivityClosedForm) {
  AccountantState empty;
  EXPECT_EQ(*Compose(empty, 0, 0.1, 1.0), empty);
  AccountantState twice = *Compose(*Compose(empty, 5, 0.1, 1.0), 5, 0.1, 1.0);
  AccountantState once = *Compose(empty, 10, 0.1, 1.0);
  EXPECT_EQ(twice.steps(), 10);
  for (size_t i = 0; i < once.rdp().size(); ++i) {
    EXPECT_NEAR(twice.rdp()[i], once.rdp()[i], 1e-12);
  }
  AccountantState full = *Compose(empty, 100, 1.0, 2.0);
  for (size_t i = 0; i < full.alphas().size(); ++i) {
    if (full.alphas()[i] == 4) EXPECT_NEAR(full.rdp()[i], 50.0, 1e-12);
  }
  EXPECT_FALSE(Compose(empty, -1, 0.1, 1.0).ok());
}

TEST(ComposeTest, FiniteAtExtremes) {
  AccountantState state = *Compose(AccountantState(), 1000000, 1e-4, 0.5);
  for (double v : state.rdp()) EXPECT_TRUE(std::isfinite(v));
  state = *Compose(AccountantState(), 1000000, 1.0, 10.0);
  for (double v : state.rdp()) EXPECT_TRUE(std::isfinite(v));
}

TEST(ComposeTest, JsonRoundTrip) {
  AccountantState state = *Compose(AccountantState(), 17, 0.02, 1.3);
  absl::StatusOr<AccountantState> back = AccountantState::FromJson(state.ToJson());
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back, state);
}

TEST(ConversionTest, GridMinimization) {
  EpsilonDelta zero = *ToEpsilonDelta(AccountantState(), 1e-5);
  EXPECT_NEAR(zero.epsilon, std::log(1e5) / 63.0, 1e-9);
  EXPECT_EQ(zero.alpha, 64);

  AccountantState state = *Compose(AccountantState(), 50, 0.05, 1.1);
  const EpsilonDelta small = *ToEpsilonDelta(state, 1e-5);
  const EpsilonDelta large = *ToEpsilonDelta(state, 1e-3);
  EXPECT_LE(large.epsilon, small.epsilon);
  double best = INFINITY;
  for (size_t i = 0; i < state.alphas().size(); ++i) {
    best = std::min(best, state.rdp()[i] + std::log(1e5) / (state.alphas()[i] - 1));
  }
  EXPECT_NEAR(small.epsilon, best, 1e-12);
}

TEST(ConversionTest, UnitRdpEverywhere) {
  nlohmann::json json = AccountantState().ToJson();
  json["rdp"] = std::vector<double>(json["alphas"].size(), 1.0);
  json["steps"] = 1;
  const EpsilonDelta result = *ToEpsilonDelta(*AccountantState::FromJson(json), 1e-5);
  EXPECT_NEAR(result.epsilon, 1.0 + std::log(1e5) / 63.0, 1e-12);
  EXPECT_NEAR(result.epsilon, 1.18275, 1e-5);
  EXPECT_EQ(result.alpha, 64);
}

TEST(ConversionTest, MonotoneInSteps) {
  double previous = 0.0;
  for (int64_t steps = 0; steps <= 400; steps += 20) {
    const double eps = EpsilonOf(steps, 0.01, 1.0, 1e-5);
    EXPECT_GE(eps, previous);
    previous = eps;
  }
}

TEST(BudgetTest, BoundaryAndDefinition) {
  DpConfig config;
  config.noise_multiplier = 1.0;
  config.sampling_rate = 0.02;
  config.delta = 1e-5;
  config.epsilon_budget = EpsilonOf(1, 0.02, 1.0, 1e-5) * 0.5;
  EXPECT_EQ(*MaxStepsWithinBudget(config), 0);

  for (double budget : {0.5, 1.0, 3.0}) {
    config.epsilon_budget = budget;
    const int64_t steps = *MaxStepsWithinBudget(config);
    EXPECT_LE(EpsilonOf(steps, 0.02, 1.0, 1e-5), budget);
    EXPECT_GT(EpsilonOf(steps + 1, 0.02, 1.0, 1e-5), budget);
  }
}

TEST(BudgetTest, MatchesDirectScanAndSigmaMonotone) {
  DpConfig config;
  config.sampling_rate = 0.05;
  config.delta = 1e-5;
  config.epsilon_budget = 2.0;
  int64_t previous = 0;
  for (double sigma : {0.6, 1.2, 2.4}) {
    config.noise_multiplier = sigma;
    const int64_t steps = *MaxStepsWithinBudget(config);
    int64_t scan = 0;
    for (int64_t t = 1; t <= 1000; ++t) {
      if (EpsilonOf(t, 0.05, sigma, 1e-5) <= 2.0) scan = t;
    }
    if (steps <= 1000) EXPECT_EQ(steps, scan) << sigma;
    EXPECT_GE(steps, previous);
    previous = steps;
  }
}

TEST(DpConfigTest, Validation) {
  DpConfig config;
  EXPECT_TRUE(config.Validate().ok());
  config.sampling_rate = 0.0;
  EXPECT_FALSE(config.Validate().ok());
  config = DpConfig();
  config.delta = 1.0;
  EXPECT_FALSE(config.Validate().ok());
  config = DpConfig();
  config.alpha_grid = {3, 2};
  EXPECT_FALSE(config.Validate().ok());
  config = DpConfig();
  config.clip_norm = INFINITY;
  EXPECT_TRUE(config.Validate().ok());
}

}  // namespace
}  // namespace psyn
