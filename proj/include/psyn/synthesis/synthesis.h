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

#ifndef PSYN_SYNTHESIS_SYNTHESIS_H_
#define PSYN_SYNTHESIS_SYNTHESIS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "psyn/models/generator.h"
#include "psyn/tabular/dataset.h"
#include "psyn/tabular/encoder.h"

namespace psyn {

enum class BalanceMode { kProportional, kBalanced, kCustom };

std::string_view BalanceModeName(BalanceMode mode);
absl::StatusOr<BalanceMode> ParseBalanceMode(std::string_view name);

struct BalancePlan {
  std::vector<int64_t> counts;  // indexed by class
  int64_t total = 0;
  BalanceMode mode = BalanceMode::kBalanced;

  absl::Status Validate(int num_classes) const;
  nlohmann::json ToJson() const;
  static absl::StatusOr<BalancePlan> FromJson(const nlohmann::json& json);
};

// Hamilton apportionment of `total` seats over non-negative weights. Ties in
// the fractional remainder go to the lower index.
absl::StatusOr<std::vector<int64_t>> LargestRemainder(std::span<const double> weights,
                                                      int64_t total);

absl::StatusOr<BalancePlan> MakeBalancePlan(
    std::span<const int64_t> real_class_counts, int64_t total, BalanceMode mode,
    std::optional<std::vector<double>> custom_weights = std::nullopt);

struct GenerationManifest {
  std::string model_id;
  uint64_t seed = 0;
  BalancePlan plan;
  std::vector<std::string> columns;           // continuous column names
  std::vector<int64_t> clamped;               // per entry of columns
  std::vector<double> clamp_rates;            // clamped / generated rows
  std::vector<std::string> warnings;

  nlohmann::json ToJson() const;
};

struct SynthesisResult {
  Dataset dataset;
  GenerationManifest manifest;
};

// Samples plan.counts[y] rows of each class y and decodes them. Rows are
// ordered by class index. Each class draws from its own stream derived from
// `seed`.
absl::StatusOr<SynthesisResult> GenerateRecords(const GeneratorModel& model,
                                                const BalancePlan& plan,
                                                const EncoderState& encoder,
                                                const Schema& schema, uint64_t seed);

}  // namespace psyn

#endif  // PSYN_SYNTHESIS_SYNTHESIS_H_
