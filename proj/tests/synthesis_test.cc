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


#include <numeric>
#include <vector>

#include "gtest/gtest.h"
#include "oracles.h"
#include "psyn/common/random.h"
#include "psyn/models/vae.h"
#include "psyn/pipeline/benchmark.h"
#include "psyn/synthesis/synthesis.h"
#include "psyn/tabular/csv.h"
#include "psyn/tabular/encoder.h"

namespace psyn {
namespace {

struct Fixture {
  Dataset data;
  EncoderState encoder;
  VaeModel model;
};

Fixture MakeFixture(uint64_t seed) {
  Dataset data = *GenerateTraumaBenchmark(400, TraumaClassShares(), seed);
  EncoderState encoder = FitEncode(data)->first;
  VaeConfig config;
  config.latent_dim = 3;
  config.hidden = {8};
  VaeModel model = *VaeModel::Create(encoder, config, seed);
  return Fixture{std::move(data), std::move(encoder), std::move(model)};
}

TEST(LargestRemainderTest, MatchesHamiltonOracle) {
  Rng rng = Rng::FromSeed(1, "lr");
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 2 + static_cast<int>(rng.UniformInt(6));
    std::vector<double> weights(k);
    for (double& w : weights) w = rng.Uniform() + (rng.Bernoulli(0.2) ? 0.0 : 0.01);
    const int64_t total = static_cast<int64_t>(rng.UniformInt(2000));
    std::vector<int64_t> counts = *LargestRemainder(weights, total);
    EXPECT_EQ(counts, oracle::Hamilton(weights, total));
    EXPECT_EQ(std::accumulate(counts.begin(), counts.end(), int64_t{0}), total);
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (int i = 0; i < k; ++i) {
      EXPECT_LE(std::abs(counts[i] - total * weights[i] / sum), 1.0);
    }
  }
}

TEST(LargestRemainderTest, Errors) {
  EXPECT_FALSE(LargestRemainder(std::vector<double>{}, 5).ok());
  EXPECT_FALSE(LargestRemainder(std::vector<double>{0.0, 0.0}, 5).ok());
  EXPECT_FALSE(LargestRemainder(std::vector<double>{1.0, -1.0}, 5).ok());
  EXPECT_FALSE(LargestRemainder(std::vector<double>{1.0, NAN}, 5).ok());
}

TEST(BalancePlanTest, Examples) {
  const std::vector<int64_t> five = {10, 20, 30, 40, 50};
  EXPECT_EQ(MakeBalancePlan(five, 100, BalanceMode::kBalanced)->counts,
            (std::vector<int64_t>{20, 20, 20, 20, 20}));
  const std::vector<int64_t> skew = {90, 10};
  EXPECT_EQ(MakeBalancePlan(skew, 10, BalanceMode::kProportional)->counts,
            (std::vector<int64_t>{9, 1}));
  const std::vector<int64_t> rare = {975, 25};
  BalancePlan balanced = *MakeBalancePlan(rare, 1000, BalanceMode::kBalanced);
  BalancePlan proportional = *MakeBalancePlan(rare, 1000, BalanceMode::kProportional);
  EXPECT_EQ(balanced.counts, (std::vector<int64_t>{500, 500}));
  EXPECT_EQ(proportional.counts, (std::vector<int64_t>{975, 25}));
  EXPECT_EQ(balanced.counts[1] / proportional.counts[1], 20);
}

TEST(BalancePlanTest, RemainderGoesToRarest) {
  const std::vector<int64_t> counts = {50, 5, 30, 1};
  EXPECT_EQ(MakeBalancePlan(counts, 10, BalanceMode::kBalanced)->counts,
            (std::vector<int64_t>{2, 3, 2, 3}));
  EXPECT_FALSE(MakeBalancePlan(counts, 3, BalanceMode::kBalanced).ok());
}

TEST(BalancePlanTest, CustomWeights) {
  const std::vector<int64_t> counts = {50, 50, 50};
  BalancePlan plan =
      *MakeBalancePlan(counts, 7, BalanceMode::kCustom, std::vector<double>{2, 1, 1});
  EXPECT_EQ(std::accumulate(plan.counts.begin(), plan.counts.end(), int64_t{0}), 7);
  EXPECT_EQ(plan.counts, oracle::Hamilton({2, 1, 1}, 7));
  EXPECT_FALSE(MakeBalancePlan(counts, 7, BalanceMode::kCustom).ok());
  EXPECT_FALSE(MakeBalancePlan(counts, 7, BalanceMode::kCustom, std::vector<double>{1, 1}).ok());
  EXPECT_FALSE(
      MakeBalancePlan(counts, 7, BalanceMode::kCustom, std::vector<double>{1, -1, 1}).ok());
}

TEST(BalancePlanTest, ValidationAndJson) {
  BalancePlan plan = *MakeBalancePlan(std::vector<int64_t>{3, 4}, 9, BalanceMode::kProportional);
  EXPECT_TRUE(plan.Validate(2).ok());
  EXPECT_FALSE(plan.Validate(3).ok());
  absl::StatusOr<BalancePlan> back = BalancePlan::FromJson(plan.ToJson());
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->counts, plan.counts);
  EXPECT_EQ(back->mode, plan.mode);
  BalancePlan broken = plan;
  broken.total = 10;
  EXPECT_FALSE(broken.Validate(2).ok());
  broken = plan;
  broken.counts[0] = -1;
  EXPECT_FALSE(broken.Validate(2).ok());
  EXPECT_EQ(*ParseBalanceMode("balanced"), BalanceMode::kBalanced);
  EXPECT_FALSE(ParseBalanceMode("uniform").ok());
}

TEST(GenerateRecordsTest, MeetsPlanExactly) {
  Fixture f = MakeFixture(1);
  Rng rng = Rng::FromSeed(2, "plans");
  for (int trial = 0; trial < 10; ++trial) {
    BalancePlan plan;
    plan.mode = BalanceMode::kCustom;
    for (int k = 0; k < 5; ++k) plan.counts.push_back(static_cast<int64_t>(rng.UniformInt(40)));
    plan.total = std::accumulate(plan.counts.begin(), plan.counts.end(), int64_t{0});
    absl::StatusOr<SynthesisResult> result =
        GenerateRecords(f.model, plan, f.encoder, f.data.schema(), trial);
    ASSERT_TRUE(result.ok()) << result.status();
    EXPECT_EQ(result->dataset.ClassCounts(), plan.counts);
    EXPECT_EQ(result->dataset.provenance(), Provenance::kSynthetic);
    for (int64_t r = 0; r < result->dataset.size(); ++r) {
      EXPECT_TRUE(ValidateRecord(f.data.schema(), result->dataset.row(r), r).ok());
    }
  }
}

TEST(GenerateRecordsTest, ZeroPlanAndDeterminism) {
  Fixture f = MakeFixture(3);
  BalancePlan zero{{0, 0, 0, 0, 0}, 0, BalanceMode::kCustom};
  absl::StatusOr<SynthesisResult> empty =
      GenerateRecords(f.model, zero, f.encoder, f.data.schema(), 1);
  ASSERT_TRUE(empty.ok());
  EXPECT_TRUE(empty->dataset.empty());

  BalancePlan plan = *MakeBalancePlan(f.data.ClassCounts(), 101, BalanceMode::kBalanced);
  SynthesisResult a = *GenerateRecords(f.model, plan, f.encoder, f.data.schema(), 7);
  SynthesisResult b = *GenerateRecords(f.model, plan, f.encoder, f.data.schema(), 7);
  EXPECT_EQ(FormatCsv(DatasetToTable(a.dataset)), FormatCsv(DatasetToTable(b.dataset)));
  EXPECT_EQ(a.manifest.ToJson(), b.manifest.ToJson());
  SynthesisResult c = *GenerateRecords(f.model, plan, f.encoder, f.data.schema(), 8);
  EXPECT_NE(FormatCsv(DatasetToTable(a.dataset)), FormatCsv(DatasetToTable(c.dataset)));
  EXPECT_EQ(a.manifest.model_id, f.model.ModelId());
  EXPECT_EQ(a.manifest.columns.size(), 12u);
  EXPECT_EQ(a.manifest.clamped.size(), 12u);
}

TEST(GenerateRecordsTest, SchemaMismatchAndBadPlan) {
  Fixture f = MakeFixture(4);
  Schema other = *Schema::Create({ColumnSpec::Continuous("x", 0, 1),
                                  ColumnSpec::Categorical("y", {"a", "b"})},
                                 "y");
  BalancePlan plan = *MakeBalancePlan(f.data.ClassCounts(), 10, BalanceMode::kBalanced);
  EXPECT_FALSE(GenerateRecords(f.model, plan, f.encoder, other, 1).ok());
  BalancePlan wrong{{5, 5}, 10, BalanceMode::kCustom};
  EXPECT_FALSE(GenerateRecords(f.model, wrong, f.encoder, f.data.schema(), 1).ok());
}

TEST(GenerateRecordsTest, HighClampRateWarns) {
  Fixture f = MakeFixture(5);
  DenseLayer& head = f.model.mutable_params().decoder.layers.back();
  head.weight.setZero();
  head.bias.setConstant(5.0);
  BalancePlan plan = *MakeBalancePlan(f.data.ClassCounts(), 50, BalanceMode::kBalanced);
  SynthesisResult result = *GenerateRecords(f.model, plan, f.encoder, f.data.schema(), 1);
  EXPECT_FALSE(result.manifest.warnings.empty());
  bool saw_full_rate = false;
  for (double rate : result.manifest.clamp_rates) saw_full_rate |= rate == 1.0;
  EXPECT_TRUE(saw_full_rate);
}

TEST(GenerateRecordsTest, RareClassBenchmarkBalances) {
  std::vector<double> shares = {0.30, 0.30, 0.20, 0.175, 0.025};
  Dataset data = *GenerateTraumaBenchmark(2000, shares, 9);
  EXPECT_EQ(data.ClassCounts()[4], 50);
  BalancePlan plan = *MakeBalancePlan(data.ClassCounts(), 1000, BalanceMode::kBalanced);
  EXPECT_EQ(plan.counts, (std::vector<int64_t>{200, 200, 200, 200, 200}));
}

}  // namespace
}  // namespace psyn
