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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "psyn/common/files.h"
#include "psyn/pipeline/config.h"
#include "psyn/pipeline/run.h"

namespace {

using Json = nlohmann::json;

struct Overrides {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<std::string> out;
  // bench-data
  std::optional<std::string> preset;
  std::optional<int64_t> rows;
  // train
  std::optional<std::string> model;
  std::optional<double> epsilon;
  std::optional<int64_t> steps;
  std::optional<double> sigma;
  std::optional<double> clip;
  std::optional<int> batch;
  bool no_dp = false;
  // generate
  std::optional<int64_t> total;
  std::optional<std::string> mode;
  // textgen
  bool no_label_in_prompt = false;
  std::optional<std::string> endpoint;
  std::optional<int64_t> review_k;
  bool no_offline_fallback = false;
};

template <typename T>
void Set(Json& json, const char* pointer, const std::optional<T>& value) {
  if (value.has_value()) json[Json::json_pointer(pointer)] = *value;
}

Json ApplyOverrides(Json json, const Overrides& o) {
  Set(json, "/seed", o.seed);
  Set(json, "/output_dir", o.out);
  Set(json, "/benchmark/preset", o.preset);
  Set(json, "/benchmark/rows", o.rows);
  Set(json, "/model/kind", o.model);
  Set(json, "/train/epsilon_budget", o.epsilon);
  Set(json, "/train/max_steps", o.steps);
  Set(json, "/train/noise_multiplier", o.sigma);
  Set(json, "/train/clip_norm", o.clip);
  Set(json, "/train/expected_batch_size", o.batch);
  if (o.no_dp) json["train"]["dp_enabled"] = false;
  Set(json, "/synthesis/total", o.total);
  Set(json, "/synthesis/mode", o.mode);
  if (o.no_label_in_prompt) json["text"]["include_label"] = false;
  Set(json, "/text/client/endpoint", o.endpoint);
  Set(json, "/text/review_k", o.review_k);
  if (o.no_offline_fallback) json["text"]["client"]["offline_fallback"] = false;
  return json;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private synthetic tabular and clinical-note pipeline"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config_path, "Pipeline config (JSON)");
  app.add_option("--seed", o.seed, "Global seed (overrides the config)");
  app.add_option("--out", o.out, "Output directory (overrides the config)");

  auto* bench = app.add_subcommand("bench-data", "Write the oracle benchmark dataset");
  bench->add_option("--preset", o.preset, "trauma or mixture");
  bench->add_option("--rows", o.rows, "Row count");

  auto* train = app.add_subcommand("train", "Train a generator with DP-SGD");
  train->add_option("--model", o.model, "vae or ddpm");
  train->add_option("--epsilon", o.epsilon, "Privacy budget epsilon");
  train->add_option("--steps", o.steps, "Maximum optimizer steps");
  train->add_option("--sigma", o.sigma, "Noise multiplier");
  train->add_option("--clip", o.clip, "Per-example clip norm");
  train->add_option("--batch", o.batch, "Expected batch size");
  train->add_flag("--no-dp", o.no_dp, "Train without clipping, noise or accounting");

  auto* generate = app.add_subcommand("generate", "Sample a synthetic dataset");
  generate->add_option("--n", o.total, "Synthetic row count");
  generate->add_option("--mode", o.mode, "proportional, balanced or custom");

  auto* textgen = app.add_subcommand("textgen", "Generate clinical notes for synthetic rows");
  textgen->add_flag("--no-label-in-prompt", o.no_label_in_prompt,
                    "Leave the mechanism out of prompts and fallback notes");
  textgen->add_option("--endpoint", o.endpoint, "Completion endpoint URL");
  textgen->add_option("--review-k", o.review_k, "Pairs exported for human review");
  textgen->add_flag("--no-offline-fallback", o.no_offline_fallback,
                    "Fail instead of using the rule-based fallback");

  app.add_subcommand("evaluate", "Fidelity, privacy and utility reports");
  app.add_subcommand("report", "Collate a human-readable run report");
  app.add_subcommand("all", "Run every stage in order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? psyn::kExitOk : psyn::kExitUsage;
  }

  Json json = Json::object();
  if (!o.config_path.empty()) {
    auto text = psyn::ReadFile(o.config_path);
    if (!text.ok()) {
      std::cerr << "error: " << text.status().message() << "\n";
      return psyn::kExitUsage;
    }
    json = Json::parse(*text, nullptr, false);
    if (json.is_discarded() || !json.is_object()) {
      std::cerr << "error: " << o.config_path << " is not a JSON object\n";
      return psyn::kExitUsage;
    }
  }
  auto config = psyn::ParseConfigText(ApplyOverrides(std::move(json), o).dump());
  if (!config.ok()) {
    std::cerr << "error: " << config.status().message() << "\n";
    return psyn::kExitUsage;
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  const absl::Status status =
      stage == "all" ? psyn::RunAll(*config) : psyn::RunStage(stage, *config);
  if (!status.ok()) {
    std::cerr << "error: " << status.message() << "\n";
    return psyn::ExitCodeFor(status);
  }
  return psyn::kExitOk;
}
