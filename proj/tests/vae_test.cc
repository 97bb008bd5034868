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
#include "psyn/models/vae.h"
#include "psyn/neural/objective.h"
#include "psyn/tabular/dataset.h"
#include "psyn/tabular/encoder.h"

namespace psyn {
namespace {

// Two continuous columns, one nullable categorical, and a binary label.
Dataset ToyDataset(uint64_t seed, int64_t n, bool with_categorical = true) {
  std::vector<ColumnSpec> columns = {ColumnSpec::Continuous("a", -5, 5),
                                     ColumnSpec::Continuous("b", 0, 10)};
  if (with_categorical) {
    columns.push_back(ColumnSpec::Categorical("c", {"x", "y", "z"}, true));
  }
  columns.push_back(ColumnSpec::Categorical("label", {"p", "q"}));
  Schema schema = *Schema::Create(columns, "label");
  Rng rng = Rng::FromSeed(seed, "toy");
  std::vector<Record> rows;
  for (int64_t i = 0; i < n; ++i) {
    Record r = {Value::Real(rng.Normal()), Value::Real(5.0 + rng.Normal())};
    if (with_categorical) {
      r.push_back(rng.Bernoulli(0.2) ? Value::Missing()
                                     : Value::Level(static_cast<int>(rng.UniformInt(3))));
    }
    r.push_back(Value::Level(static_cast<int>(i % 2)));
    rows.push_back(std::move(r));
  }
  return *Dataset::Create(schema, std::move(rows));
}

VaeConfig SmallConfig() {
  VaeConfig config;
  config.latent_dim = 2;
  config.hidden = {6};
  return config;
}

TEST(KlDivergenceTest, ClosedForm) {
  EXPECT_EQ(KlDivergence(Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Zero(3, 2)), 0.0);
  EXPECT_DOUBLE_EQ(KlDivergence(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Zero(1, 1)), 0.5);
  Rng rng = Rng::FromSeed(1, "kl");
  for (int i = 0; i < 100; ++i) {
    Eigen::MatrixXd mu(4, 3);
    Eigen::MatrixXd logvar(4, 3);
    for (int j = 0; j < 12; ++j) {
      mu.data()[j] = 3 * rng.Normal();
      logvar.data()[j] = 3 * rng.Normal();
    }
    EXPECT_GE(KlDivergence(mu, logvar), 0.0);
  }
}

TEST(VaeTest, GradientMatchesFiniteDifferences) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Dataset data = ToyDataset(seed, 6);
    auto [layout, encoded] = *FitEncode(data);
    VaeModel model = *VaeModel::Create(layout, SmallConfig(), seed);
    Rng rng = Rng::FromSeed(seed, "noise");
    const Eigen::MatrixXd noise = model.DrawNoise(encoded.rows(), rng);
    absl::StatusOr<double> error =
        MaxGradientRelativeError(model, encoded.values, encoded.labels, noise);
    ASSERT_TRUE(error.ok()) << error.status();
    EXPECT_LT(*error, 1e-4);
  }
}

TEST(VaeTest, LossDecomposesOverKlWeight) {
  Dataset data = ToyDataset(2, 20);
  auto [layout, encoded] = *FitEncode(data);
  VaeConfig zero = SmallConfig();
  zero.kl_weight = 0.0;
  VaeConfig weighted = SmallConfig();
  weighted.kl_weight = 2.5;
  VaeModel m0 = *VaeModel::Create(layout, zero, 4);
  VaeModel m1 = *VaeModel::Create(layout, weighted, 4);
  Rng rng = Rng::FromSeed(3, "noise");
  const Eigen::MatrixXd noise = m0.DrawNoise(encoded.rows(), rng);
  VaeLoss l0 = *m0.ForwardLoss(encoded.values, encoded.labels, noise, nullptr);
  VaeLoss l1 = *m1.ForwardLoss(encoded.values, encoded.labels, noise, nullptr);
  EXPECT_NEAR(l0.total + 2.5 * l0.kl, l1.total, 1e-12);
  EXPECT_NEAR(l0.kl, l1.kl, 1e-15);
  EXPECT_NEAR(*m1.SumLoss(encoded.values, encoded.labels, noise, nullptr),
              l1.total * encoded.rows(), 1e-9);
}

TEST(VaeTest, PerfectReconstructionWithoutKlIsZero) {
  Dataset data = ToyDataset(5, 10, false);
  auto [layout, encoded] = *FitEncode(data);
  VaeConfig config;
  config.latent_dim = 2;
  config.hidden = {};
  config.kl_weight = 0.0;
  VaeModel model = *VaeModel::Create(layout, config, 1);
  VaeParams& params = model.mutable_params();
  params.encoder.layers[0].weight.setZero();
  params.encoder.layers[0].weight.topLeftCorner(2, 2).setIdentity();
  params.encoder.layers[0].bias.setZero();
  params.decoder.layers[0].weight.setZero();
  params.decoder.layers[0].weight.topLeftCorner(2, 2).setIdentity();
  params.decoder.layers[0].bias.setZero();
  const Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(encoded.rows(), 2);
  VaeLoss loss = *model.ForwardLoss(encoded.values, encoded.labels, noise, nullptr);
  EXPECT_EQ(loss.reconstruction, 0.0);
  EXPECT_EQ(loss.total, 0.0);
}

TEST(VaeTest, StandardPosteriorHasZeroKl) {
  Dataset data = ToyDataset(6, 5);
  auto [layout, encoded] = *FitEncode(data);
  VaeModel model = *VaeModel::Create(layout, SmallConfig(), 2);
  model.mutable_params().encoder.layers.back().weight.setZero();
  model.mutable_params().encoder.layers.back().bias.setZero();
  const Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(encoded.rows(), 2);
  EXPECT_EQ(model.ForwardLoss(encoded.values, encoded.labels, noise, nullptr)->kl, 0.0);
}

TEST(VaeTest, SamplingContract) {
  Dataset data = ToyDataset(7, 40);
  auto [layout, encoded] = *FitEncode(data);
  VaeModel model = *VaeModel::Create(layout, SmallConfig(), 3);
  Rng rng = Rng::FromSeed(1, "s");
  EXPECT_EQ(model.Sample(0, 0, rng)->rows(), 0);
  EXPECT_FALSE(model.Sample(2, 5, rng).ok());
  EXPECT_FALSE(model.Sample(-1, 5, rng).ok());
  Rng a = Rng::FromSeed(9, "s");
  Rng b = Rng::FromSeed(9, "s");
  const Eigen::MatrixXd sa = *model.Sample(1, 50, a);
  EXPECT_EQ(sa, *model.Sample(1, 50, b));
  for (int64_t r = 0; r < sa.rows(); ++r) {
    for (const ColumnTransform& t : layout.transforms()) {
      if (t.kind == ColumnKind::kCategorical) {
        EXPECT_EQ(sa.block(r, t.offset, 1, t.width).sum(), 1.0);
      } else {
        EXPECT_LE(std::abs(sa(r, t.offset)), 1.0);
      }
    }
  }
  const std::vector<int> labels(sa.rows(), 1);
  EXPECT_TRUE(Decode(sa, labels, layout, data.schema(), Provenance::kSynthetic).ok());
}

TEST(VaeTest, ZeroDecoderSamplesFirstLevelAndZero) {
  Dataset data = ToyDataset(8, 30);
  auto [layout, encoded] = *FitEncode(data);
  VaeModel model = *VaeModel::Create(layout, SmallConfig(), 5);
  for (DenseLayer& layer : model.mutable_params().decoder.layers) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
  Rng rng = Rng::FromSeed(2, "zero");
  const Eigen::MatrixXd rows = *model.Sample(0, 10, rng);
  for (const ColumnTransform& t : layout.transforms()) {
    for (int64_t r = 0; r < rows.rows(); ++r) {
      if (t.kind == ColumnKind::kCategorical) {
        EXPECT_EQ(rows(r, t.offset), 1.0);
      } else {
        EXPECT_EQ(rows(r, t.offset), 0.0);
      }
    }
  }
}

TEST(VaeTest, ConfigValidationAndJson) {
  VaeConfig config = SmallConfig();
  EXPECT_TRUE(config.Validate().ok());
  absl::StatusOr<VaeConfig> back = VaeConfig::FromJson(config.ToJson());
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->ToJson(), config.ToJson());
  config.kl_weight = -1.0;
  EXPECT_FALSE(config.Validate().ok());
  config = SmallConfig();
  config.decoder_variance = 0.0;
  EXPECT_FALSE(config.Validate().ok());
  config = SmallConfig();
  config.latent_dim = 0;
  EXPECT_FALSE(config.Validate().ok());
  nlohmann::json json = SmallConfig().ToJson();
  json["latnet_dim"] = 3;
  EXPECT_FALSE(VaeConfig::FromJson(json).ok());
}

TEST(VaeTest, ParametersRoundTripAndClone) {
  Dataset data = ToyDataset(9, 10);
  auto [layout, encoded] = *FitEncode(data);
  VaeModel model = *VaeModel::Create(layout, SmallConfig(), 6);
  ParameterSet params = model.Parameters();
  params *= 0.5;
  ASSERT_TRUE(model.SetParameters(params).ok());
  EXPECT_TRUE(model.Parameters() == params);
  std::unique_ptr<GeneratorModel> clone = model.Clone();
  EXPECT_TRUE(clone->Parameters() == params);
  EXPECT_EQ(clone->kind(), ModelKind::kVae);
  EXPECT_FALSE(model.SetParameters(ParameterSet()).ok());
}

}  // namespace
}  // namespace psyn
