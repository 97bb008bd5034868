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

#ifndef PSYN_TEXT_PROMPT_H_
#define PSYN_TEXT_PROMPT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "psyn/tabular/dataset.h"

namespace psyn {

struct Exemplar {
  std::string record;  // rendered record
  std::string note;
};

// Instruction text with {name} placeholders. A placeholder names a schema
// column or the reserved word `label`, which resolves to the class level.
struct PromptTemplate {
  std::string id;
  std::string instruction;
  std::vector<Exemplar> exemplars;

  // Placeholder names in order of first appearance.
  absl::StatusOr<std::vector<std::string>> Placeholders() const;
  absl::Status Validate(const Schema& schema) const;

  nlohmann::json ToJson() const;
  static absl::StatusOr<PromptTemplate> FromJson(const nlohmann::json& json);
};

// Built-in zero-shot template referencing every feature column. With
// `include_label` false the class is left out of the instruction.
PromptTemplate DefaultTemplate(const Schema& schema, bool include_label);

// Human-readable value: level string, continuous with one decimal, "unknown"
// for missing.
std::string RenderValue(const ColumnSpec& spec, const Value& value);

// "name: value; name: value; ..." over all columns, label included.
std::string RenderRecord(const Schema& schema, const Record& record);

// Exemplars (in order) followed by the substituted instruction.
absl::StatusOr<std::string> RenderPrompt(const PromptTemplate& prompt_template,
                                         const Schema& schema, const Record& record);

// Deterministic rule-based note, a pure function of its arguments.
std::string FallbackNote(const Schema& schema, const Record& record,
                         const std::string& template_id, uint64_t seed,
                         bool include_label = true);

}  // namespace psyn

#endif  // PSYN_TEXT_PROMPT_H_
