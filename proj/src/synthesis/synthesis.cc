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

#include "psyn/synthesis/synthesis.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "psyn/common/random.h"
#include "psyn/common/status_macros.h"

namespace psyn {

std::string_view BalanceModeName(BalanceMode mode) {
  switch (mode) {
    case BalanceMode::kProportional:
      return "proportional";
    case BalanceMode::kBalanced:
      return "balanced";
    case BalanceMode::kCustom:
      return "custom";
  }
  return "balanced";
}

absl::StatusOr<BalanceMode> ParseBalanceMode(std::string_view name) {
  if (name == "proportional") return BalanceMode::kProportional;
  if (name == "balanced") return BalanceMode::kBalanced;
  if (name == "custom") return BalanceMode::kCustom;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown balance mode '", std::string(name), "'"));
}

absl::Status BalancePlan::Validate(int num_classes) const {
  if (static_cast<int>(counts.size()) != num_classes) {
    return absl::InvalidArgumentError(absl::StrCat(
        "plan has ", counts.size(), " classes, schema has ", num_classes));
  }
  int64_t sum = 0;
  for (int64_t c : counts) {
    if (c < 0) return absl::InvalidArgumentError("plan counts must be non-negative");
    sum += c;
  }
  if (sum != total) {
    return absl::InvalidArgumentError(
        absl::StrCat("plan counts sum to ", sum, ", expected ", total));
  }
  return absl::OkStatus();
}

nlohmann::json BalancePlan::ToJson() const {
  return {{"mode", std::string(BalanceModeName(mode))}, {"total", total}, {"counts", counts}};
}

absl::StatusOr<BalancePlan> BalancePlan::FromJson(const nlohmann::json& json) {
  BalancePlan plan;
  try {
    PSYN_ASSIGN_OR_RETURN(plan.mode, ParseBalanceMode(json.at("mode").get<std::string>()));
    plan.total = json.at("total").get<int64_t>();
    plan.counts = json.at("counts").get<std::vector<int64_t>>();
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("invalid balance plan: ", e.what()));
  }
  PSYN_RETURN_IF_ERROR(plan.Validate(static_cast<int>(plan.counts.size())));
  return plan;
}

absl::StatusOr<std::vector<int64_t>> LargestRemainder(std::span<const double> weights,
                                                      int64_t total) {
  if (weights.empty()) return absl::InvalidArgumentError("no classes to apportion");
  if (total < 0) return absl::InvalidArgumentError("total must be non-negative");
  double weight_sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      return absl::InvalidArgumentError("weights must be finite and non-negative");
    }
    weight_sum += w;
  }
  if (!(weight_sum > 0.0)) return absl::InvalidArgumentError("weights sum to zero");

  const size_t k = weights.size();
  std::vector<int64_t> counts(k);
  std::vector<double> remainders(k);
  int64_t assigned = 0;
  for (size_t i = 0; i < k; ++i) {
    const double quota = static_cast<double>(total) * weights[i] / weight_sum;
    counts[i] = static_cast<int64_t>(std::floor(quota));
    remainders[i] = quota - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return remainders[a] > remainders[b]; });
  for (size_t i = 0; assigned < total; i = (i + 1) % k) {
    ++counts[order[i]];
    ++assigned;
  }
  for (size_t i = k; assigned > total; i = (i == 1 ? k : i - 1)) {
    if (counts[order[i - 1]] > 0) {
      --counts[order[i - 1]];
      --assigned;
    }
  }
  return counts;
}

absl::StatusOr<BalancePlan> MakeBalancePlan(std::span<const int64_t> real_class_counts,
                                            int64_t total, BalanceMode mode,
                                            std::optional<std::vector<double>> custom_weights) {
  const size_t k = real_class_counts.size();
  if (k == 0) return absl::InvalidArgumentError("no classes to plan");
  if (total < 0) return absl::InvalidArgumentError("N must be non-negative");
  BalancePlan plan;
  plan.total = total;
  plan.mode = mode;
  switch (mode) {
    case BalanceMode::kProportional: {
      std::vector<double> weights(real_class_counts.begin(), real_class_counts.end());
      PSYN_ASSIGN_OR_RETURN(plan.counts, LargestRemainder(weights, total));
      break;
    }
    case BalanceMode::kBalanced: {
      if (total < static_cast<int64_t>(k)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "balanced mode needs N >= number of classes (", total, " < ", k, ")"));
      }
      plan.counts.assign(k, total / static_cast<int64_t>(k));
      int64_t remainder = total % static_cast<int64_t>(k);
      std::vector<size_t> rarest(k);
      std::iota(rarest.begin(), rarest.end(), 0);
      std::stable_sort(rarest.begin(), rarest.end(), [&](size_t a, size_t b) {
        return real_class_counts[a] < real_class_counts[b];
      });
      for (size_t i = 0; i < static_cast<size_t>(remainder); ++i) ++plan.counts[rarest[i]];
      break;
    }
    case BalanceMode::kCustom: {
      if (!custom_weights.has_value()) {
        return absl::InvalidArgumentError("custom mode requires class weights");
      }
      if (custom_weights->size() != k) {
        return absl::InvalidArgumentError(absl::StrCat(
            "custom weights have ", custom_weights->size(), " entries, expected ", k));
      }
      auto counts = LargestRemainder(*custom_weights, total);
      if (!counts.ok()) {
        return absl::InvalidArgumentError(
            absl::StrCat("malformed custom weights: ", counts.status().message()));
      }
      plan.counts = *std::move(counts);
      break;
    }
  }
  return plan;
}

nlohmann::json GenerationManifest::ToJson() const {
  nlohmann::json clamp = nlohmann::json::object();
  for (size_t i = 0; i < columns.size(); ++i) {
    clamp[columns[i]] = {{"count", clamped[i]}, {"rate", clamp_rates[i]}};
  }
  return {{"model_id", model_id},
          {"seed", seed},
          {"plan", plan.ToJson()},
          {"clamped", clamp},
          {"warnings", warnings}};
}

absl::StatusOr<SynthesisResult> GenerateRecords(const GeneratorModel& model,
                                                const BalancePlan& plan,
                                                const EncoderState& encoder,
                                                const Schema& schema, uint64_t seed) {
  if (encoder.schema_hash() != schema.Hash() ||
      model.layout().schema_hash() != schema.Hash()) {
    return absl::FailedPreconditionError(
        "schema hash mismatch: model was trained on a different schema");
  }
  if (!(model.layout() == encoder)) {
    return absl::FailedPreconditionError("model layout differs from the encoder state");
  }
  PSYN_RETURN_IF_ERROR(plan.Validate(schema.num_classes()));

  const Rng root = Rng::FromSeed(seed, "synthesis");
  Eigen::MatrixXd rows(plan.total, encoder.width());
  std::vector<int> labels;
  labels.reserve(plan.total);
  std::vector<int64_t> clamped(schema.num_columns(), 0);
  Eigen::Index cursor = 0;
  for (int y = 0; y < static_cast<int>(plan.counts.size()); ++y) {
    const int64_t n = plan.counts[y];
    if (n == 0) continue;
    Rng rng = root.Fork(static_cast<uint64_t>(y));
    PSYN_ASSIGN_OR_RETURN(Eigen::MatrixXd block, model.Sample(y, n, rng, &clamped));
    rows.middleRows(cursor, n) = block;
    labels.insert(labels.end(), n, y);
    cursor += n;
  }
  clamped.resize(schema.num_columns(), 0);

  DecodeStats stats;
  PSYN_ASSIGN_OR_RETURN(Dataset dataset, Decode(rows, labels, encoder, schema,
                                                Provenance::kSynthetic, &stats));
  GenerationManifest manifest;
  manifest.model_id = model.ModelId();
  manifest.seed = seed;
  manifest.plan = plan;
  for (int c = 0; c < schema.num_columns(); ++c) {
    if (c == schema.label_index() || schema.column(c).is_categorical()) continue;
    const int64_t count = clamped[c] + (c < static_cast<int>(stats.clamped.size())
                                            ? stats.clamped[c] : 0);
    const double rate =
        plan.total > 0 ? static_cast<double>(count) / static_cast<double>(plan.total) : 0.0;
    manifest.columns.push_back(schema.column(c).name);
    manifest.clamped.push_back(count);
    manifest.clamp_rates.push_back(rate);
    if (rate > 0.5) {
      manifest.warnings.push_back(absl::StrFormat(
          "column '%s' clamped in %.1f%% of rows; the generator may be degenerate",
          schema.column(c).name, 100.0 * rate));
    }
  }
  return SynthesisResult{std::move(dataset), std::move(manifest)};
}

}  // namespace psyn
