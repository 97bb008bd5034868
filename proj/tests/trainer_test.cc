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
#include <limits>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"
#include "psyn/common/random.h"
#include "psyn/neural/objective.h"
#include "psyn/neural/optimizer.h"
#include "psyn/training/dp_trainer.h"

namespace psyn {
namespace {

// Per-row loss 0.5 * ||theta - x||^2 with a single parameter row theta.
class QuadraticObjective final : public Objective {
 public:
  explicit QuadraticObjective(int width) : theta_(Eigen::MatrixXd::Constant(1, width, 3.0)) {}
  ParameterSet Parameters() const override { return ParameterSet({theta_}); }
  absl::Status SetParameters(const ParameterSet& params) override {
    theta_ = params[0];
    return absl::OkStatus();
  }
  int noise_width() const override { return 0; }
  Eigen::MatrixXd DrawNoise(int64_t rows, Rng&) const override {
    return Eigen::MatrixXd(rows, 0);
  }
  absl::StatusOr<double> SumLoss(const Eigen::MatrixXd& x, std::span<const int>,
                                 const Eigen::MatrixXd&, GradientSet* grad) const override {
    const Eigen::MatrixXd diff = (-x).rowwise() + theta_.row(0);
    if (grad != nullptr) *grad = GradientSet({diff.colwise().sum()});
    return 0.5 * diff.squaredNorm();
  }
  const Eigen::MatrixXd& theta() const { return theta_; }

 private:
  Eigen::MatrixXd theta_;
};

EncodedMatrix RandomData(int64_t n, int width, uint64_t seed) {
  Rng rng = Rng::FromSeed(seed, "data");
  EncodedMatrix data;
  data.values.resize(n, width);
  for (int64_t i = 0; i < data.values.size(); ++i) data.values.data()[i] = rng.Normal();
  data.labels.assign(n, 0);
  return data;
}

TrainConfig BaseConfig() {
  TrainConfig config;
  config.expected_batch_size = 20;
  config.max_steps = 50;
  config.learning_rate = 0.1;
  config.optimizer = OptimizerKind::kSgd;
  config.dp.noise_multiplier = 1.0;
  config.dp.clip_norm = 1.0;
  config.seed = 9;
  return config;
}

double EpsilonAfter(int64_t steps, double q, double sigma, double delta) {
  return ToEpsilonDelta(*Compose(AccountantState(), steps, q, sigma), delta)->epsilon;
}

TEST(PoissonSampleTest, Properties) {
  Rng rng = Rng::FromSeed(1, "poisson");
  EXPECT_EQ(PoissonSample(10, 1.0, rng).size(), 10u);
  Rng a = Rng::FromSeed(2, "poisson");
  Rng b = Rng::FromSeed(2, "poisson");
  const std::vector<int64_t> first = PoissonSample(10000, 0.5, a);
  EXPECT_EQ(first, PoissonSample(10000, 0.5, b));
  EXPECT_NEAR(static_cast<double>(first.size()), 5000.0, 250.0);
  EXPECT_TRUE(std::is_sorted(first.begin(), first.end()));
}

TEST(ClipTest, ScalesOnlyAboveThreshold) {
  GradientSet big({Eigen::MatrixXd::Constant(1, 4, 5.0)});
  EXPECT_NEAR(ClipGradient(big, 1.0).L2Norm(), 1.0, 1e-12);
  GradientSet small({Eigen::MatrixXd::Constant(1, 4, 0.2)});
  EXPECT_TRUE(ClipGradient(small, 1.0) == small);
  EXPECT_TRUE(ClipGradient(big, std::numeric_limits<double>::infinity()) == big);
}

TEST(ClipAndAggregateTest, Examples) {
  Rng rng = Rng::FromSeed(3, "agg");
  GradientSet shape({Eigen::MatrixXd::Zero(2, 3)});
  GradientSet g({Eigen::MatrixXd::Zero(2, 3)});
  g[0](0, 0) = 10.0;
  std::vector<GradientSet> one = {g};
  GradientSet out = *ClipAndAggregate(one, shape, 1.0, 0.0, 8.0, rng);
  EXPECT_NEAR(out.L2Norm(), 1.0 / 8.0, 1e-15);

  GradientSet small({Eigen::MatrixXd::Zero(2, 3)});
  small[0](1, 2) = 0.4;
  std::vector<GradientSet> below = {small};
  EXPECT_TRUE(*ClipAndAggregate(below, shape, 1.0, 0.0, 1.0, rng) == small);

  EXPECT_EQ(ClipAndAggregate({}, shape, 1.0, 0.0, 4.0, rng)->L2Norm(), 0.0);

  GradientSet bad({Eigen::MatrixXd::Constant(2, 3, NAN)});
  std::vector<GradientSet> nonfinite = {bad};
  EXPECT_FALSE(ClipAndAggregate(nonfinite, shape, 1.0, 0.0, 4.0, rng).ok());
}

TEST(ClipAndAggregateTest, EmptyBatchNoiseStd) {
  Rng rng = Rng::FromSeed(4, "noise");
  GradientSet shape({Eigen::MatrixXd::Zero(1, 1000)});
  const double sigma = 1.3;
  const double clip = 0.7;
  const double batch = 16.0;
  double sq = 0.0;
  int64_t count = 0;
  for (int draw = 0; draw < 100; ++draw) {
    GradientSet out = *ClipAndAggregate({}, shape, clip, sigma, batch, rng);
    sq += out.SquaredNorm();
    count += out.NumElements();
  }
  EXPECT_NEAR(std::sqrt(sq / count) / (sigma * clip / batch), 1.0, 0.02);
}

TEST(ClipAndAggregateTest, ClippedNormsNeverExceedBound) {
  Rng rng = Rng::FromSeed(5, "clip");
  for (int i = 0; i < 2000; ++i) {
    GradientSet g({Eigen::MatrixXd(3, 4), Eigen::MatrixXd(1, 5)});
    const double scale = std::exp(6.0 * rng.Normal());
    for (size_t t = 0; t < g.size(); ++t) {
      for (int64_t j = 0; j < g[t].size(); ++j) g[t].data()[j] = scale * rng.Normal();
    }
    EXPECT_LE(ClipGradient(g, 0.5).L2Norm(), 0.5 + 1e-9);
  }
}

TEST(DpTrainStepTest, UnclippedNoiselessAggregateEqualsPlainStep) {
  QuadraticObjective model(4);
  EncodedMatrix data = RandomData(100, 4, 1);
  Rng batch_rng = Rng::FromSeed(6, "batch");
  const std::vector<int64_t> indices = PoissonSample(100, 0.2, batch_rng);
  Eigen::MatrixXd x(indices.size(), 4);
  for (size_t i = 0; i < indices.size(); ++i) x.row(i) = data.values.row(indices[i]);
  const std::vector<int> labels(indices.size(), 0);
  std::vector<GradientSet> per =
      *PerExampleGrads(model, x, labels, Eigen::MatrixXd(x.rows(), 0));
  Rng noise = Rng::FromSeed(6, "unused");
  GradientSet dp = *ClipAndAggregate(per, model.Parameters(),
                                     std::numeric_limits<double>::infinity(), 0.0, 20.0, noise);
  GradientSet plain;
  ASSERT_TRUE(model.SumLoss(x, labels, Eigen::MatrixXd(x.rows(), 0), &plain).ok());
  plain *= 1.0 / 20.0;
  std::vector<double> a = dp.Flatten();
  std::vector<double> b = plain.Flatten();
  for (size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  ParameterSet theta = model.Parameters();
  std::vector<double> da = SgdStep(theta, dp, SgdConfig{0.1})->Flatten();
  std::vector<double> db = SgdStep(theta, plain, SgdConfig{0.1})->Flatten();
  for (size_t i = 0; i < da.size(); ++i) EXPECT_NEAR(da[i], db[i], 1e-12);
}

TEST(DpTrainStepTest, AccountantAdvancesOncePerStep) {
  QuadraticObjective model(3);
  EncodedMatrix data = RandomData(200, 3, 2);
  TrainConfig config = BaseConfig();
  OptimizerState optimizer = MakeOptimizer(config.optimizer, model.Parameters(), 0.1);
  AccountantState accountant;
  TrainStreams streams = TrainStreams::FromSeed(1);
  for (int i = 0; i < 3; ++i) {
    ASSERT_TRUE(DpTrainStep(model, data, config, optimizer, accountant, streams).ok());
  }
  EXPECT_EQ(accountant.steps(), 3);
  EXPECT_EQ(accountant, *Compose(AccountantState(), 3, 0.1, 1.0));

  config.dp_enabled = false;
  AccountantState untouched;
  ASSERT_TRUE(DpTrainStep(model, data, config, optimizer, untouched, streams).ok());
  EXPECT_EQ(untouched.steps(), 0);
}

TEST(DpTrainStepTest, NoiseDoesNotChangeBatchSelection) {
  EncodedMatrix data = RandomData(300, 2, 3);
  std::vector<int64_t> sizes[2];
  for (int variant = 0; variant < 2; ++variant) {
    QuadraticObjective model(2);
    TrainConfig config = BaseConfig();
    config.dp.noise_multiplier = variant == 0 ? 0.5 : 4.0;
    OptimizerState optimizer = MakeOptimizer(config.optimizer, model.Parameters(), 0.1);
    AccountantState accountant;
    TrainStreams streams = TrainStreams::FromSeed(config.seed);
    for (int i = 0; i < 10; ++i) {
      sizes[variant].push_back(
          DpTrainStep(model, data, config, optimizer, accountant, streams)->batch_size);
    }
  }
  EXPECT_EQ(sizes[0], sizes[1]);
}

TEST(TrainLoopTest, DeterministicUnderSeed) {
  EncodedMatrix data = RandomData(100, 3, 4);
  QuadraticObjective a(3);
  QuadraticObjective b(3);
  TrainReport ra = *TrainLoop(a, data, BaseConfig());
  TrainReport rb = *TrainLoop(b, data, BaseConfig());
  EXPECT_EQ(a.theta(), b.theta());
  EXPECT_EQ(ra.loss_trace, rb.loss_trace);
}

TEST(TrainLoopTest, ZeroStepsLeavesModelUntouched) {
  EncodedMatrix data = RandomData(50, 2, 5);
  QuadraticObjective model(2);
  const ParameterSet before = model.Parameters();
  TrainConfig config = BaseConfig();
  config.max_steps = 0;
  TrainReport report = *TrainLoop(model, data, config);
  EXPECT_EQ(report.steps, 0);
  EXPECT_EQ(report.spent.epsilon, 0.0);
  EXPECT_TRUE(model.Parameters() == before);
}

TEST(TrainLoopTest, BudgetStopsAtExactlySevenSteps) {
  EncodedMatrix data = RandomData(200, 2, 6);
  QuadraticObjective model(2);
  TrainConfig config = BaseConfig();
  config.max_steps = 100;
  const double q = 20.0 / 200.0;
  config.dp.epsilon_budget = 0.5 * (EpsilonAfter(7, q, 1.0, 1e-5) + EpsilonAfter(8, q, 1.0, 1e-5));
  TrainReport report = *TrainLoop(model, data, config);
  EXPECT_EQ(report.steps, 7);
  EXPECT_EQ(report.abort_reason, "budget");
  DpConfig dp = config.dp;
  dp.sampling_rate = q;
  EXPECT_EQ(*MaxStepsWithinBudget(dp), 7);
  EXPECT_LE(report.spent.epsilon, *config.dp.epsilon_budget);
}

TEST(TrainLoopTest, ReportedEpsilonMatchesRecomputation) {
  EncodedMatrix data = RandomData(400, 2, 7);
  QuadraticObjective model(2);
  TrainConfig config = BaseConfig();
  config.max_steps = 37;
  TrainReport report = *TrainLoop(model, data, config);
  ASSERT_EQ(report.steps, 37);
  const double expected =
      EpsilonAfter(report.steps, report.sampling_rate, report.noise_multiplier, 1e-5);
  EXPECT_NEAR(report.spent.epsilon, expected, 1e-12);
}

TEST(TrainLoopTest, EpochsLimitSteps) {
  EncodedMatrix data = RandomData(100, 2, 8);
  QuadraticObjective model(2);
  TrainConfig config = BaseConfig();
  config.epochs = 2;
  EXPECT_EQ(PlannedSteps(config, 100), 10);
  EXPECT_EQ(TrainLoop(model, data, config)->steps, 10);
}

TEST(TrainLoopTest, QuadraticLossDecreases) {
  EncodedMatrix data = RandomData(500, 3, 9);
  QuadraticObjective model(3);
  TrainConfig config = BaseConfig();
  config.dp_enabled = false;
  config.max_steps = 80;
  TrainReport report = *TrainLoop(model, data, config);
  const size_t quarter = report.loss_trace.size() / 4;
  const double first =
      std::accumulate(report.loss_trace.begin(), report.loss_trace.begin() + quarter, 0.0);
  const double last =
      std::accumulate(report.loss_trace.end() - quarter, report.loss_trace.end(), 0.0);
  EXPECT_LT(last, first);
  EXPECT_EQ(report.spent.epsilon, 0.0);
}

TEST(TrainLoopTest, NoiselessUnclippedMatchesPlainLoopDirection) {
  EncodedMatrix data = RandomData(300, 2, 10);
  TrainConfig config = BaseConfig();
  config.dp.noise_multiplier = 1e-9;
  config.dp.clip_norm = 1e9;
  config.max_steps = 60;
  QuadraticObjective model(2);
  TrainReport report = *TrainLoop(model, data, config);
  EXPECT_EQ(report.steps, 60);
  const Eigen::RowVectorXd mean = data.values.colwise().mean();
  EXPECT_LT((model.theta().row(0) - mean).norm(), 0.5);
}

TEST(TrainConfigTest, Validation) {
  TrainConfig config = BaseConfig();
  EXPECT_TRUE(config.Validate(100).ok());
  EXPECT_FALSE(config.Validate(10).ok());
  config.dp.noise_multiplier = 0.0;
  EXPECT_FALSE(config.Validate(100).ok());
  config.dp_enabled = false;
  EXPECT_TRUE(config.Validate(100).ok());
}

}  // namespace
}  // namespace psyn
