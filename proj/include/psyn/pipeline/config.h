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

#ifndef PSYN_PIPELINE_CONFIG_H_
#define PSYN_PIPELINE_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "psyn/eval/classifier.h"
#include "psyn/models/ddpm.h"
#include "psyn/models/generator.h"
#include "psyn/models/vae.h"
#include "psyn/neural/optimizer.h"
#include "psyn/synthesis/synthesis.h"
#include "psyn/text/generation.h"
#include "psyn/training/dp_trainer.h"

namespace psyn {

struct DataSection {
  std::string path;         // real CSV; empty uses the bench-data output
  std::string schema_path;  // schema JSON; empty infers from the CSV
  std::string label_column = "mechanism";
  double test_fraction = 0.2;
};

struct BenchmarkSection {
  std::string preset = "trauma";  // "trauma" or "mixture"
  int64_t rows = 10000;
  std::vector<double> class_shares;  // empty uses the preset's shares
};

struct ModelSection {
  ModelKind kind = ModelKind::kVae;
  VaeConfig vae;
  DdpmConfig ddpm;
};

struct TrainSection {
  bool dp_enabled = true;
  double noise_multiplier = 1.0;
  double clip_norm = 1.0;
  int expected_batch_size = 256;
  double delta = 1e-5;
  std::optional<double> epsilon_budget;
  int64_t max_steps = 3000;
  std::optional<int> epochs;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;

  TrainConfig ToTrainConfig(uint64_t seed) const;
};

struct SynthesisSection {
  BalanceMode mode = BalanceMode::kBalanced;
  int64_t total = 1000;
  std::vector<double> custom_weights;
};

struct TextSection {
  std::string template_path;  // PromptTemplate JSON; empty uses the default
  bool include_label = true;
  GenerationClientConfig client;
  int64_t review_k = 20;
};

struct EvaluateSection {
  bool fidelity = true;
  bool privacy = true;
  bool utility = true;
  bool ks_permutation = false;
  int permutations = 1000;
  int64_t membership_rows = 500;
  ClassifierConfig classifier;
};

// Required keys: seed, output_dir. Every other key has a default.
struct PipelineConfig {
  uint64_t seed = 0;
  std::string output_dir;
  DataSection data;
  BenchmarkSection benchmark;
  ModelSection model;
  TrainSection train;
  SynthesisSection synthesis;
  TextSection text;
  EvaluateSection evaluate;

  nlohmann::json ToJson() const;
  // Rejects unknown keys at every level, naming the offending key path.
  static absl::StatusOr<PipelineConfig> FromJson(const nlohmann::json& json);
};

// Parses and validates; referenced input files must exist.
absl::StatusOr<PipelineConfig> ParseConfig(const std::string& path);
absl::StatusOr<PipelineConfig> ParseConfigText(const std::string& text);

}  // namespace psyn

#endif  // PSYN_PIPELINE_CONFIG_H_
