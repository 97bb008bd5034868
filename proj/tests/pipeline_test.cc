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
#include <filesystem>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "psyn/common/files.h"
#include "psyn/common/random.h"
#include "psyn/pipeline/benchmark.h"
#include "psyn/pipeline/checkpoint.h"
#include "psyn/pipeline/config.h"
#include "psyn/pipeline/run.h"
#include "psyn/tabular/csv.h"
#include "psyn/tabular/encoder.h"

namespace psyn {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("psyn_pipeline_test_" + name);
  fs::remove_all(dir);
  return dir;
}

PipelineConfig SmallConfig(const fs::path& dir, ModelKind kind) {
  PipelineConfig config;
  config.seed = 11;
  config.output_dir = dir.string();
  config.benchmark.preset = "mixture";
  config.benchmark.rows = 600;
  config.data.label_column = "component";
  config.model.kind = kind;
  config.model.vae.hidden = {16};
  config.model.vae.latent_dim = 2;
  config.model.ddpm.hidden = {16};
  config.model.ddpm.timesteps = 20;
  config.train.max_steps = 30;
  config.train.expected_batch_size = 64;
  config.synthesis.total = 90;
  config.text.review_k = 6;
  config.evaluate.membership_rows = 100;
  config.evaluate.classifier.steps = 50;
  return config;
}

TEST(ConfigTest, JsonRoundTripIsFixpoint) {
  PipelineConfig config = SmallConfig("/tmp/x", ModelKind::kDdpm);
  config.train.epsilon_budget = 2.5;
  config.synthesis.mode = BalanceMode::kCustom;
  config.synthesis.custom_weights = {1, 2, 3};
  const nlohmann::json json = config.ToJson();
  absl::StatusOr<PipelineConfig> back = PipelineConfig::FromJson(json);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->ToJson(), json);
  EXPECT_EQ(back->model.kind, ModelKind::kDdpm);
  EXPECT_EQ(*back->train.epsilon_budget, 2.5);
}

TEST(ConfigTest, UnknownKeysAreNamed) {
  absl::StatusOr<PipelineConfig> bad = ParseConfigText(
      R"({"seed": 1, "output_dir": "/tmp/x", "train": {"sigmma": 1.0}})");
  ASSERT_FALSE(bad.ok());
  EXPECT_NE(bad.status().message().find("unknown config key 'train.sigmma'"), std::string::npos);
  absl::StatusOr<PipelineConfig> top =
      ParseConfigText(R"({"seed": 1, "output_dir": "/tmp/x", "sed": 2})");
  ASSERT_FALSE(top.ok());
  EXPECT_NE(top.status().message().find("'sed'"), std::string::npos);
}

TEST(ConfigTest, RequiredKeysAndValidation) {
  EXPECT_FALSE(ParseConfigText(R"({"seed": 1})").ok());
  EXPECT_FALSE(ParseConfigText(R"({"output_dir": "/tmp/x"})").ok());
  EXPECT_FALSE(ParseConfigText("{not json").ok());
  EXPECT_FALSE(
      ParseConfigText(R"({"seed": 1, "output_dir": "/tmp/x", "train": {"max_steps": -1}})").ok());
  EXPECT_FALSE(ParseConfigText(
                   R"({"seed": 1, "output_dir": "/tmp/x", "data": {"path": "/nonexistent.csv"}})")
                   .ok());
  absl::StatusOr<PipelineConfig> ok = ParseConfigText(R"({"seed": 3, "output_dir": "/tmp/x"})");
  ASSERT_TRUE(ok.ok());
  EXPECT_EQ(ok->seed, 3u);
  EXPECT_TRUE(ok->train.dp_enabled);
}

TEST(BenchmarkTest, TraumaClassSharesAndSchema) {
  Dataset ds = *GenerateTraumaBenchmark(10000, TraumaClassShares(), 1);
  EXPECT_EQ(ds.schema().columns().size(), 25u);
  const std::vector<int64_t> counts = ds.ClassCounts();
  EXPECT_EQ(counts, (std::vector<int64_t>{1500, 5500, 2000, 750, 250}));
  Dataset again = *GenerateTraumaBenchmark(10000, TraumaClassShares(), 1);
  EXPECT_EQ(FormatCsv(DatasetToTable(ds)), FormatCsv(DatasetToTable(again)));
  for (const Record& r : ds.rows()) ASSERT_TRUE(ValidateRecord(ds.schema(), r, 0).ok());
}

TEST(BenchmarkTest, MixtureMatchesOracle) {
  MixtureOracle oracle = MixtureOracle::Default();
  Dataset ds = *GenerateBenchmark("mixture", 3000, {}, 4);
  EXPECT_EQ(ds.schema().Hash(), oracle.schema().Hash());
  const std::vector<int64_t> counts = ds.ClassCounts();
  for (int y = 0; y < oracle.num_classes(); ++y) {
    double sum = 0;
    for (int64_t i = 0; i < ds.size(); ++i) {
      if (ds.label(i) == y) sum += ds.rows()[i][1].real();
    }
    EXPECT_NEAR(sum / counts[y], oracle.means[y][0], 5 * oracle.stddev / std::sqrt(counts[y]));
  }
  EXPECT_FALSE(GenerateBenchmark("unknown", 10, {}, 1).ok());
}

TEST(CheckpointTest, RoundTripAndCorruption) {
  Dataset ds = *GenerateBenchmark("mixture", 200, {}, 2);
  EncoderState enc = *FitEncoder(ds);
  VaeConfig vae;
  vae.hidden = {8};
  vae.latent_dim = 2;
  std::unique_ptr<GeneratorModel> model =
      *CreateGenerator(ModelKind::kVae, vae.ToJson(), enc, 5);
  AccountantState acc = *Compose(AccountantState(), 12, 0.01, 1.1);
  const std::string bytes = *SerializeCheckpoint(*model, ds.schema(), acc);
  absl::StatusOr<Checkpoint> back = DeserializeCheckpoint(bytes);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->model->ModelId(), model->ModelId());
  EXPECT_EQ(back->schema.Hash(), ds.schema().Hash());
  EXPECT_EQ(back->accountant.steps(), 12);
  Rng a = Rng::FromSeed(1, "s");
  Rng b = Rng::FromSeed(1, "s");
  EXPECT_EQ(*model->Sample(1, 20, a), *back->model->Sample(1, 20, b));
  EXPECT_EQ(*SerializeCheckpoint(*back->model, back->schema, back->accountant), bytes);

  absl::StatusOr<Checkpoint> truncated = DeserializeCheckpoint(bytes.substr(0, bytes.size() - 9));
  ASSERT_FALSE(truncated.ok());
  EXPECT_NE(truncated.status().message().find("corrupt checkpoint"), std::string::npos);
  std::string wrong_version = bytes;
  wrong_version[4] = 9;
  absl::StatusOr<Checkpoint> version = DeserializeCheckpoint(wrong_version);
  ASSERT_FALSE(version.ok());
  EXPECT_NE(version.status().message().find("version"), std::string::npos);
  EXPECT_FALSE(DeserializeCheckpoint("PSY").ok());
}

TEST(RunTest, ExitCodes) {
  EXPECT_EQ(ExitCodeFor(absl::OkStatus()), 0);
  EXPECT_EQ(ExitCodeFor(absl::ResourceExhaustedError("")), 3);
  EXPECT_EQ(ExitCodeFor(absl::UnavailableError("")), 4);
  EXPECT_EQ(ExitCodeFor(absl::DeadlineExceededError("")), 4);
  EXPECT_EQ(ExitCodeFor(absl::InvalidArgumentError("")), 2);
  EXPECT_NE(DeriveSeed(1, "train"), DeriveSeed(1, "generate"));
  EXPECT_EQ(DeriveSeed(1, "train"), DeriveSeed(1, "train"));
}

TEST(RunTest, EvaluateWithoutSyntheticFails) {
  const fs::path dir = TempDir("missing");
  PipelineConfig config = SmallConfig(dir, ModelKind::kVae);
  ASSERT_TRUE(RunStage("bench-data", config).ok());
  absl::Status status = RunStage("evaluate", config);
  ASSERT_FALSE(status.ok());
  EXPECT_NE(status.message().find("missing artifact: synthetic dataset"), std::string::npos);
  EXPECT_EQ(ExitCodeFor(status), 2);
  EXPECT_FALSE(fs::exists(dir / artifacts::kFidelity));
  EXPECT_FALSE(RunStage("frobnicate", config).ok());
  fs::remove_all(dir);
}

TEST(RunTest, FullPipelineIsDeterministic) {
  for (ModelKind kind : {ModelKind::kVae, ModelKind::kDdpm}) {
    const fs::path first = TempDir("first");
    const fs::path second = TempDir("second");
    ASSERT_TRUE(RunAll(SmallConfig(first, kind)).ok());
    ASSERT_TRUE(RunAll(SmallConfig(second, kind)).ok());
    for (const char* rel : {artifacts::kRealData, artifacts::kTrainData, artifacts::kCheckpoint,
                            artifacts::kSynthetic, artifacts::kBimodal, artifacts::kReview,
                            artifacts::kFidelity, artifacts::kPrivacy, artifacts::kUtility,
                            artifacts::kReport}) {
      ASSERT_TRUE(fs::exists(first / rel)) << rel;
      EXPECT_EQ(*Sha256File((first / rel).string()), *Sha256File((second / rel).string())) << rel;
    }
    Dataset synth = *LoadDataset((first / artifacts::kSynthetic).string(),
                                 *LoadSchemaFile((first / artifacts::kSchema).string()));
    EXPECT_EQ(synth.ClassCounts(), (std::vector<int64_t>{30, 30, 30}));
    fs::remove_all(first);
    fs::remove_all(second);
  }
}

TEST(RunTest, BudgetExhaustedBeforeFirstStep) {
  const fs::path dir = TempDir("budget");
  PipelineConfig config = SmallConfig(dir, ModelKind::kVae);
  config.train.epsilon_budget = 1e-6;
  ASSERT_TRUE(RunStage("bench-data", config).ok());
  absl::Status status = RunStage("train", config);
  EXPECT_EQ(ExitCodeFor(status), 3);
  EXPECT_FALSE(fs::exists(dir / artifacts::kCheckpoint));
  fs::remove_all(dir);
}

}  // namespace
}  // namespace psyn
