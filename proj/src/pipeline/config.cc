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

#include "psyn/pipeline/config.h"

#include <cmath>
#include <filesystem>
#include <initializer_list>
#include <limits>
#include "absl/strings/string_view.h"

#include "absl/strings/str_cat.h"
#include "psyn/common/files.h"
#include "psyn/common/status_macros.h"

namespace psyn {
namespace {

using Json = nlohmann::json;

absl::Status CheckKeys(const Json& json, absl::string_view where,
                       std::initializer_list<absl::string_view> allowed) {
  if (!json.is_object()) {
    return absl::InvalidArgumentError(absl::StrCat("'", where, "' must be an object"));
  }
  for (const auto& [key, value] : json.items()) {
    bool known = false;
    for (absl::string_view a : allowed) known = known || key == a;
    if (!known) {
      return absl::InvalidArgumentError(absl::StrCat(
          "unknown config key '", where.empty() ? "" : absl::StrCat(where, "."), key, "'"));
    }
  }
  return absl::OkStatus();
}

// Reads json[key] into *out when present.
template <typename T>
absl::Status Read(const Json& json, absl::string_view where, const char* key, T* out) {
  if (!json.contains(key)) return absl::OkStatus();
  try {
    *out = json.at(key).get<T>();
  } catch (const Json::exception&) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid value for '", where, ".", key, "'"));
  }
  return absl::OkStatus();
}

template <typename T>
absl::Status ReadOptional(const Json& json, absl::string_view where, const char* key,
                          std::optional<T>* out) {
  if (!json.contains(key)) return absl::OkStatus();
  if (json.at(key).is_null()) {
    out->reset();
    return absl::OkStatus();
  }
  T value;
  PSYN_RETURN_IF_ERROR(Read(json, where, key, &value));
  *out = value;
  return absl::OkStatus();
}

Json OptionalJson(const auto& value) {
  return value.has_value() ? Json(*value) : Json(nullptr);
}

absl::Status RequireFile(const std::string& path, absl::string_view what) {
  if (!path.empty() && !std::filesystem::exists(path)) {
    return absl::NotFoundError(absl::StrCat(what, " '", path, "' does not exist"));
  }
  return absl::OkStatus();
}

absl::Status ParseTrain(const Json& j, TrainSection* t) {
  constexpr absl::string_view kWhere = "train";
  PSYN_RETURN_IF_ERROR(CheckKeys(
      j, kWhere,
      {"dp_enabled", "noise_multiplier", "clip_norm", "expected_batch_size", "delta",
       "epsilon_budget", "max_steps", "epochs", "learning_rate", "optimizer"}));
  PSYN_RETURN_IF_ERROR(Read(j, kWhere, "dp_enabled", &t->dp_enabled));
  PSYN_RETURN_IF_ERROR(Read(j, kWhere, "noise_multiplier", &t->noise_multiplier));
  if (j.contains("clip_norm") && j["clip_norm"] == "inf") {
    t->clip_norm = std::numeric_limits<double>::infinity();
  } else {
    PSYN_RETURN_IF_ERROR(Read(j, kWhere, "clip_norm", &t->clip_norm));
  }
  PSYN_RETURN_IF_ERROR(Read(j, kWhere, "expected_batch_size", &t->expected_batch_size));
  PSYN_RETURN_IF_ERROR(Read(j, kWhere, "delta", &t->delta));
  PSYN_RETURN_IF_ERROR(ReadOptional(j, kWhere, "epsilon_budget", &t->epsilon_budget));
  PSYN_RETURN_IF_ERROR(Read(j, kWhere, "max_steps", &t->max_steps));
  PSYN_RETURN_IF_ERROR(ReadOptional(j, kWhere, "epochs", &t->epochs));
  PSYN_RETURN_IF_ERROR(Read(j, kWhere, "learning_rate", &t->learning_rate));
  std::string optimizer(OptimizerName(t->optimizer));
  PSYN_RETURN_IF_ERROR(Read(j, kWhere, "optimizer", &optimizer));
  PSYN_ASSIGN_OR_RETURN(t->optimizer, ParseOptimizer(optimizer));

  if (t->dp_enabled) {
    DpConfig dp;
    dp.noise_multiplier = t->noise_multiplier;
    dp.clip_norm = t->clip_norm;
    dp.sampling_rate = 0.5;
    dp.delta = t->delta;
    dp.epsilon_budget = t->epsilon_budget;
    PSYN_RETURN_IF_ERROR(dp.Validate());
  }
  if (t->expected_batch_size < 1) {
    return absl::InvalidArgumentError("train.expected_batch_size must be >= 1");
  }
  if (t->max_steps < 0) return absl::InvalidArgumentError("train.max_steps must be >= 0");
  if (!(t->learning_rate > 0.0)) {
    return absl::InvalidArgumentError("train.learning_rate must be positive");
  }
  return absl::OkStatus();
}

}  // namespace

TrainConfig TrainSection::ToTrainConfig(uint64_t seed) const {
  TrainConfig config;
  config.dp.noise_multiplier = noise_multiplier;
  config.dp.clip_norm = clip_norm;
  config.dp.delta = delta;
  config.dp.epsilon_budget = epsilon_budget;
  config.dp_enabled = dp_enabled;
  config.max_steps = max_steps;
  config.epochs = epochs;
  config.expected_batch_size = expected_batch_size;
  config.learning_rate = learning_rate;
  config.optimizer = optimizer;
  config.seed = seed;
  return config;
}

nlohmann::json PipelineConfig::ToJson() const {
  Json json;
  json["seed"] = seed;
  json["output_dir"] = output_dir;
  json["data"] = {{"path", data.path},
                  {"schema_path", data.schema_path},
                  {"label_column", data.label_column},
                  {"test_fraction", data.test_fraction}};
  json["benchmark"] = {{"preset", benchmark.preset},
                       {"rows", benchmark.rows},
                       {"class_shares", benchmark.class_shares}};
  json["model"] = {{"kind", std::string(ModelKindName(model.kind))},
                   {"vae", model.vae.ToJson()},
                   {"ddpm", model.ddpm.ToJson()}};
  json["train"] = {{"dp_enabled", train.dp_enabled},
                   {"noise_multiplier", train.noise_multiplier},
                   {"clip_norm", std::isinf(train.clip_norm) ? Json("inf")
                                                             : Json(train.clip_norm)},
                   {"expected_batch_size", train.expected_batch_size},
                   {"delta", train.delta},
                   {"epsilon_budget", OptionalJson(train.epsilon_budget)},
                   {"max_steps", train.max_steps},
                   {"epochs", OptionalJson(train.epochs)},
                   {"learning_rate", train.learning_rate},
                   {"optimizer", std::string(OptimizerName(train.optimizer))}};
  json["synthesis"] = {{"mode", std::string(BalanceModeName(synthesis.mode))},
                       {"total", synthesis.total},
                       {"custom_weights", synthesis.custom_weights}};
  json["text"] = {{"template_path", text.template_path},
                  {"include_label", text.include_label},
                  {"client", text.client.ToJson()},
                  {"review_k", text.review_k}};
  json["evaluate"] = {{"fidelity", evaluate.fidelity},
                      {"privacy", evaluate.privacy},
                      {"utility", evaluate.utility},
                      {"ks_permutation", evaluate.ks_permutation},
                      {"permutations", evaluate.permutations},
                      {"membership_rows", evaluate.membership_rows},
                      {"classifier", evaluate.classifier.ToJson()}};
  return json;
}

absl::StatusOr<PipelineConfig> PipelineConfig::FromJson(const nlohmann::json& json) {
  PSYN_RETURN_IF_ERROR(CheckKeys(json, "",
                                 {"seed", "output_dir", "data", "benchmark", "model",
                                  "train", "synthesis", "text", "evaluate"}));
  PipelineConfig config;
  for (const char* key : {"seed", "output_dir"}) {
    if (!json.contains(key)) {
      return absl::InvalidArgumentError(absl::StrCat("missing required config key '", key, "'"));
    }
  }
  PSYN_RETURN_IF_ERROR(Read(json, "", "seed", &config.seed));
  PSYN_RETURN_IF_ERROR(Read(json, "", "output_dir", &config.output_dir));
  if (config.output_dir.empty()) return absl::InvalidArgumentError("output_dir is empty");

  if (json.contains("data")) {
    const Json& j = json["data"];
    PSYN_RETURN_IF_ERROR(
        CheckKeys(j, "data", {"path", "schema_path", "label_column", "test_fraction"}));
    PSYN_RETURN_IF_ERROR(Read(j, "data", "path", &config.data.path));
    PSYN_RETURN_IF_ERROR(Read(j, "data", "schema_path", &config.data.schema_path));
    PSYN_RETURN_IF_ERROR(Read(j, "data", "label_column", &config.data.label_column));
    PSYN_RETURN_IF_ERROR(Read(j, "data", "test_fraction", &config.data.test_fraction));
  }
  if (!(config.data.test_fraction > 0.0 && config.data.test_fraction < 1.0)) {
    return absl::InvalidArgumentError("data.test_fraction must lie in (0, 1)");
  }

  if (json.contains("benchmark")) {
    const Json& j = json["benchmark"];
    PSYN_RETURN_IF_ERROR(CheckKeys(j, "benchmark", {"preset", "rows", "class_shares"}));
    PSYN_RETURN_IF_ERROR(Read(j, "benchmark", "preset", &config.benchmark.preset));
    PSYN_RETURN_IF_ERROR(Read(j, "benchmark", "rows", &config.benchmark.rows));
    PSYN_RETURN_IF_ERROR(Read(j, "benchmark", "class_shares", &config.benchmark.class_shares));
  }
  if (config.benchmark.preset != "trauma" && config.benchmark.preset != "mixture") {
    return absl::InvalidArgumentError(absl::StrCat(
        "benchmark.preset must be 'trauma' or 'mixture', got '", config.benchmark.preset, "'"));
  }
  if (config.benchmark.rows < 1) return absl::InvalidArgumentError("benchmark.rows must be >= 1");

  if (json.contains("model")) {
    const Json& j = json["model"];
    PSYN_RETURN_IF_ERROR(CheckKeys(j, "model", {"kind", "vae", "ddpm"}));
    std::string kind(ModelKindName(config.model.kind));
    PSYN_RETURN_IF_ERROR(Read(j, "model", "kind", &kind));
    PSYN_ASSIGN_OR_RETURN(config.model.kind, ParseModelKind(kind));
    if (j.contains("vae")) {
      PSYN_ASSIGN_OR_RETURN(config.model.vae, VaeConfig::FromJson(j["vae"]));
    }
    if (j.contains("ddpm")) {
      PSYN_ASSIGN_OR_RETURN(config.model.ddpm, DdpmConfig::FromJson(j["ddpm"]));
    }
  }

  if (json.contains("train")) PSYN_RETURN_IF_ERROR(ParseTrain(json["train"], &config.train));

  if (json.contains("synthesis")) {
    const Json& j = json["synthesis"];
    PSYN_RETURN_IF_ERROR(CheckKeys(j, "synthesis", {"mode", "total", "custom_weights"}));
    std::string mode(BalanceModeName(config.synthesis.mode));
    PSYN_RETURN_IF_ERROR(Read(j, "synthesis", "mode", &mode));
    PSYN_ASSIGN_OR_RETURN(config.synthesis.mode, ParseBalanceMode(mode));
    PSYN_RETURN_IF_ERROR(Read(j, "synthesis", "total", &config.synthesis.total));
    PSYN_RETURN_IF_ERROR(
        Read(j, "synthesis", "custom_weights", &config.synthesis.custom_weights));
  }
  if (config.synthesis.total < 0) {
    return absl::InvalidArgumentError("synthesis.total must be >= 0");
  }
  if (config.synthesis.mode == BalanceMode::kCustom && config.synthesis.custom_weights.empty()) {
    return absl::InvalidArgumentError("synthesis.custom_weights required in custom mode");
  }

  if (json.contains("text")) {
    const Json& j = json["text"];
    PSYN_RETURN_IF_ERROR(
        CheckKeys(j, "text", {"template_path", "include_label", "client", "review_k"}));
    PSYN_RETURN_IF_ERROR(Read(j, "text", "template_path", &config.text.template_path));
    PSYN_RETURN_IF_ERROR(Read(j, "text", "include_label", &config.text.include_label));
    PSYN_RETURN_IF_ERROR(Read(j, "text", "review_k", &config.text.review_k));
    if (j.contains("client")) {
      PSYN_ASSIGN_OR_RETURN(config.text.client, GenerationClientConfig::FromJson(j["client"]));
    }
  }
  if (config.text.review_k < 0) return absl::InvalidArgumentError("text.review_k must be >= 0");

  if (json.contains("evaluate")) {
    const Json& j = json["evaluate"];
    PSYN_RETURN_IF_ERROR(CheckKeys(j, "evaluate",
                                   {"fidelity", "privacy", "utility", "ks_permutation",
                                    "permutations", "membership_rows", "classifier"}));
    PSYN_RETURN_IF_ERROR(Read(j, "evaluate", "fidelity", &config.evaluate.fidelity));
    PSYN_RETURN_IF_ERROR(Read(j, "evaluate", "privacy", &config.evaluate.privacy));
    PSYN_RETURN_IF_ERROR(Read(j, "evaluate", "utility", &config.evaluate.utility));
    PSYN_RETURN_IF_ERROR(Read(j, "evaluate", "ks_permutation", &config.evaluate.ks_permutation));
    PSYN_RETURN_IF_ERROR(Read(j, "evaluate", "permutations", &config.evaluate.permutations));
    PSYN_RETURN_IF_ERROR(
        Read(j, "evaluate", "membership_rows", &config.evaluate.membership_rows));
    if (j.contains("classifier")) {
      PSYN_ASSIGN_OR_RETURN(config.evaluate.classifier,
                            ClassifierConfig::FromJson(j["classifier"]));
    }
  }
  if (config.evaluate.permutations < 1) {
    return absl::InvalidArgumentError("evaluate.permutations must be >= 1");
  }
  if (config.evaluate.membership_rows < 1) {
    return absl::InvalidArgumentError("evaluate.membership_rows must be >= 1");
  }
  return config;
}

absl::StatusOr<PipelineConfig> ParseConfigText(const std::string& text) {
  Json json = Json::parse(text, nullptr, false);
  if (json.is_discarded()) return absl::InvalidArgumentError("config is not valid JSON");
  PSYN_ASSIGN_OR_RETURN(PipelineConfig config, PipelineConfig::FromJson(json));
  PSYN_RETURN_IF_ERROR(RequireFile(config.data.path, "data.path"));
  PSYN_RETURN_IF_ERROR(RequireFile(config.data.schema_path, "data.schema_path"));
  PSYN_RETURN_IF_ERROR(RequireFile(config.text.template_path, "text.template_path"));
  return config;
}

absl::StatusOr<PipelineConfig> ParseConfig(const std::string& path) {
  PSYN_ASSIGN_OR_RETURN(const std::string text, ReadFile(path));
  return ParseConfigText(text);
}

}  // namespace psyn
