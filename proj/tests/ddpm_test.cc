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
#include "psyn/common/random.h"
#include "psyn/models/ddpm.h"
#include "psyn/neural/objective.h"
#include "psyn/tabular/dataset.h"
#include "psyn/tabular/encoder.h"
#include "psyn/training/dp_trainer.h"

namespace psyn {
namespace {

Dataset ToyDataset(uint64_t seed, int64_t n, bool with_categorical = true) {
  std::vector<ColumnSpec> columns = {ColumnSpec::Continuous("a", -5, 5)};
  if (with_categorical) columns.push_back(ColumnSpec::Categorical("c", {"x", "y"}));
  columns.push_back(ColumnSpec::Categorical("label", {"p", "q", "r"}));
  Schema schema = *Schema::Create(columns, "label");
  Rng rng = Rng::FromSeed(seed, "toy");
  std::vector<Record> rows;
  for (int64_t i = 0; i < n; ++i) {
    Record r = {Value::Real(rng.Normal())};
    if (with_categorical) r.push_back(Value::Level(static_cast<int>(rng.UniformInt(2))));
    r.push_back(Value::Level(static_cast<int>(i % 3)));
    rows.push_back(std::move(r));
  }
  return *Dataset::Create(schema, std::move(rows));
}

DdpmConfig TinyConfig(int timesteps = 20) {
  DdpmConfig config;
  config.timesteps = timesteps;
  config.hidden = {8};
  config.embedding_dim = 4;
  return config;
}

TEST(NoiseScheduleTest, Construction) {
  NoiseSchedule single = *NoiseSchedule::Linear(1);
  EXPECT_EQ(single.beta(1), 1e-4);
  EXPECT_DOUBLE_EQ(single.alpha_bar(1), 1.0 - 1e-4);
  NoiseSchedule two = *NoiseSchedule::FromBetas({0.5, 0.5});
  EXPECT_DOUBLE_EQ(two.alpha_bar(2), 0.25);
  EXPECT_EQ(two.alpha_bar(0), 1.0);
  NoiseSchedule linear = *NoiseSchedule::Linear(200);
  EXPECT_DOUBLE_EQ(linear.beta(1), 1e-4);
  EXPECT_DOUBLE_EQ(linear.beta(200), 0.02);
  for (int t = 1; t <= 200; ++t) EXPECT_LT(linear.alpha_bar(t), linear.alpha_bar(t - 1));
  EXPECT_FALSE(NoiseSchedule::Linear(0).ok());
  EXPECT_FALSE(NoiseSchedule::FromBetas({0.5, 1.0}).ok());
}

TEST(QSampleTest, PlugInAndLimits) {
  NoiseSchedule two = *NoiseSchedule::FromBetas({0.5, 0.5});
  const std::vector<int> t2 = {2};
  EXPECT_DOUBLE_EQ((*QSample(Eigen::MatrixXd::Ones(1, 1), t2, Eigen::MatrixXd::Zero(1, 1),
                             two))(0, 0),
                   0.5);
  NoiseSchedule tiny = *NoiseSchedule::FromBetas({1e-12});
  const std::vector<int> t1 = {1};
  EXPECT_NEAR((*QSample(Eigen::MatrixXd::Constant(1, 1, 0.7), t1,
                        Eigen::MatrixXd::Ones(1, 1), tiny))(0, 0),
              0.7, 1e-5);
  const std::vector<int> t3 = {3};
  EXPECT_FALSE(QSample(Eigen::MatrixXd::Ones(1, 1), t3, Eigen::MatrixXd::Zero(1, 1), two).ok());
}

TEST(QSampleTest, MonteCarloMoments) {
  NoiseSchedule schedule = *NoiseSchedule::FromBetas({0.3, 0.4});
  const int n = 100000;
  Rng rng = Rng::FromSeed(1, "q");
  Eigen::MatrixXd eps(n, 1);
  for (int i = 0; i < n; ++i) eps(i, 0) = rng.Normal();
  const std::vector<int> t(n, 2);
  const Eigen::MatrixXd x_t = *QSample(Eigen::MatrixXd::Constant(n, 1, 0.8), t, eps, schedule);
  const double a_bar = 0.7 * 0.6;
  const double mean = x_t.mean();
  const double var = (x_t.array() - mean).square().sum() / (n - 1);
  EXPECT_NEAR(mean, std::sqrt(a_bar) * 0.8, 0.01);
  EXPECT_NEAR(var / (1.0 - a_bar), 1.0, 0.02);
}

TEST(TimestepEmbeddingTest, SinCosLayout) {
  const std::vector<int> t = {0, 5};
  const Eigen::MatrixXd e = TimestepEmbedding(t, 4);
  EXPECT_EQ(e(0, 0), 0.0);
  EXPECT_EQ(e(0, 2), 1.0);
  EXPECT_DOUBLE_EQ(e(1, 0), std::sin(5.0));
  EXPECT_DOUBLE_EQ(e(1, 3), std::cos(5.0 * std::exp(-std::log(1e4) / 2)));
}

TEST(DdpmLossTest, StubDenoisers) {
  NoiseSchedule schedule = *NoiseSchedule::Linear(50);
  const int width = 5;
  const int n = 10000;
  Rng rng = Rng::FromSeed(2, "loss");
  Eigen::MatrixXd noise(n, width + 1);
  for (int i = 0; i < n; ++i) {
    noise(i, 0) = 1 + static_cast<double>(rng.UniformInt(50));
    for (int j = 1; j <= width; ++j) noise(i, j) = rng.Normal();
  }
  const Eigen::MatrixXd x0 = Eigen::MatrixXd::Constant(n, width, 0.3);
  const std::vector<int> labels(n, 0);
  const Eigen::MatrixXd eps = noise.rightCols(width);
  Denoiser oracle = [&](const Eigen::MatrixXd&, std::span<const int>,
                        std::span<const int>) -> absl::StatusOr<Eigen::MatrixXd> { return eps; };
  EXPECT_EQ(*DdpmSumLoss(oracle, x0, labels, noise, schedule), 0.0);
  Denoiser zero = [&](const Eigen::MatrixXd& x, std::span<const int>,
                      std::span<const int>) -> absl::StatusOr<Eigen::MatrixXd> {
    return Eigen::MatrixXd::Zero(x.rows(), x.cols());
  };
  EXPECT_NEAR(*DdpmSumLoss(zero, x0, labels, noise, schedule) / n / width, 1.0, 0.05);
}

TEST(DdpmLossTest, GradientMatchesFiniteDifferences) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Dataset data = ToyDataset(seed, 6);
    auto [layout, encoded] = *FitEncode(data);
    DdpmModel model = *DdpmModel::Create(layout, TinyConfig(), seed);
    Rng rng = Rng::FromSeed(seed, "noise");
    const Eigen::MatrixXd noise = model.DrawNoise(encoded.rows(), rng);
    EXPECT_EQ(noise.cols(), 1 + layout.width());
    absl::StatusOr<double> error =
        MaxGradientRelativeError(model, encoded.values, encoded.labels, noise);
    ASSERT_TRUE(error.ok()) << error.status();
    EXPECT_LT(*error, 1e-4);
  }
}

TEST(DdpmSampleTest, SingleStepHandEvaluation) {
  NoiseSchedule schedule = *NoiseSchedule::Linear(1);
  Eigen::MatrixXd seen;
  Denoiser zero = [&](const Eigen::MatrixXd& x, std::span<const int> t,
                      std::span<const int>) -> absl::StatusOr<Eigen::MatrixXd> {
    EXPECT_EQ(t[0], 1);
    seen = x;
    return Eigen::MatrixXd::Zero(x.rows(), x.cols());
  };
  Rng rng = Rng::FromSeed(3, "single");
  const std::vector<int> labels(4, 0);
  const Eigen::MatrixXd out = *DdpmSampleRaw(zero, schedule, 3, labels, rng);
  const Eigen::MatrixXd expected = seen / std::sqrt(1.0 - 1e-4);
  EXPECT_TRUE(out.isApprox(expected, 1e-15));
}

TEST(DdpmSampleTest, SamplingContract) {
  Dataset data = ToyDataset(4, 30);
  auto [layout, encoded] = *FitEncode(data);
  DdpmModel model = *DdpmModel::Create(layout, TinyConfig(), 1);
  Rng rng = Rng::FromSeed(1, "s");
  EXPECT_EQ(model.Sample(0, 0, rng)->rows(), 0);
  EXPECT_FALSE(model.Sample(3, 2, rng).ok());
  Rng a = Rng::FromSeed(2, "s");
  Rng b = Rng::FromSeed(2, "s");
  const Eigen::MatrixXd sa = *model.Sample(2, 40, a);
  EXPECT_EQ(sa, *model.Sample(2, 40, b));
  for (int64_t r = 0; r < sa.rows(); ++r) {
    for (const ColumnTransform& t : layout.transforms()) {
      if (t.kind == ColumnKind::kCategorical) {
        EXPECT_EQ(sa.block(r, t.offset, 1, t.width).sum(), 1.0);
      } else {
        EXPECT_LE(std::abs(sa(r, t.offset)), 1.0);
      }
    }
  }
}

TEST(DdpmTrainTest, ConstantDataIsRecovered) {
  Dataset data = ToyDataset(5, 50, false);
  EncoderState layout = FitEncode(data)->first;
  const double c = 0.3;
  EncodedMatrix constant;
  constant.values = Eigen::MatrixXd::Constant(512, 1, c);
  constant.labels.assign(512, 0);
  DdpmConfig config = TinyConfig(50);
  config.hidden = {32, 32};
  config.embedding_dim = 16;
  DdpmModel model = *DdpmModel::Create(layout, config, 2);
  TrainConfig train;
  train.dp_enabled = false;
  train.max_steps = 1500;
  train.expected_batch_size = 128;
  train.learning_rate = 2e-3;
  train.seed = 3;
  ASSERT_TRUE(TrainLoop(model, constant, train).ok());
  Rng rng = Rng::FromSeed(4, "sample");
  const Eigen::MatrixXd samples = *model.Sample(0, 2000, rng);
  EXPECT_NEAR(samples.mean(), c, 0.1);
}

TEST(DdpmConfigTest, ValidationAndJson) {
  DdpmConfig config = TinyConfig();
  absl::StatusOr<DdpmConfig> back = DdpmConfig::FromJson(config.ToJson());
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->ToJson(), config.ToJson());
  config.embedding_dim = 3;
  EXPECT_FALSE(config.Validate().ok());
  config = TinyConfig();
  config.timesteps = 0;
  EXPECT_FALSE(config.Validate().ok());
  nlohmann::json json = TinyConfig().ToJson();
  json["steps"] = 5;
  EXPECT_FALSE(DdpmConfig::FromJson(json).ok());
}

}  // namespace
}  // namespace psyn
