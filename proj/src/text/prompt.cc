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

#include "psyn/text/prompt.h"

#include <algorithm>
#include <array>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "psyn/common/random.h"
#include "psyn/common/status_macros.h"

namespace psyn {
namespace {

constexpr char kLabelPlaceholder[] = "label";

absl::StatusOr<std::string> ResolvePlaceholder(const std::string& name,
                                               const Schema& schema,
                                               const Record& record) {
  if (name == kLabelPlaceholder) {
    return RenderValue(schema.label_spec(), record[schema.label_index()]);
  }
  const std::optional<int> column = schema.FindColumn(name);
  if (!column.has_value()) {
    return absl::InvalidArgumentError(
        absl::StrCat("unresolved placeholder {", name, "}: no such column"));
  }
  return RenderValue(schema.column(*column), record[*column]);
}

}  // namespace

absl::StatusOr<std::vector<std::string>> PromptTemplate::Placeholders() const {
  std::vector<std::string> names;
  size_t pos = 0;
  while ((pos = instruction.find('{', pos)) != std::string::npos) {
    const size_t close = instruction.find('}', pos);
    if (close == std::string::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("unterminated placeholder at offset ", pos));
    }
    std::string name = instruction.substr(pos + 1, close - pos - 1);
    if (name.empty() || name.find('{') != std::string::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed placeholder at offset ", pos));
    }
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      names.push_back(std::move(name));
    }
    pos = close + 1;
  }
  return names;
}

absl::Status PromptTemplate::Validate(const Schema& schema) const {
  if (id.empty()) return absl::InvalidArgumentError("template id must be non-empty");
  if (instruction.empty()) return absl::InvalidArgumentError("template instruction is empty");
  PSYN_ASSIGN_OR_RETURN(const std::vector<std::string> names, Placeholders());
  for (const std::string& name : names) {
    if (name != kLabelPlaceholder && !schema.FindColumn(name).has_value()) {
      return absl::InvalidArgumentError(
          absl::StrCat("unresolved placeholder {", name, "}: no such column"));
    }
  }
  return absl::OkStatus();
}

nlohmann::json PromptTemplate::ToJson() const {
  nlohmann::json examples = nlohmann::json::array();
  for (const Exemplar& e : exemplars) examples.push_back({{"record", e.record}, {"note", e.note}});
  return {{"id", id}, {"instruction", instruction}, {"exemplars", examples}};
}

absl::StatusOr<PromptTemplate> PromptTemplate::FromJson(const nlohmann::json& json) {
  PromptTemplate result;
  try {
    for (const auto& [key, value] : json.items()) {
      if (key == "id") {
        result.id = value.get<std::string>();
      } else if (key == "instruction") {
        result.instruction = value.get<std::string>();
      } else if (key == "exemplars") {
        for (const auto& e : value) {
          result.exemplars.push_back(
              {e.at("record").get<std::string>(), e.at("note").get<std::string>()});
        }
      } else {
        return absl::InvalidArgumentError(absl::StrCat("unknown template key '", key, "'"));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("invalid template: ", e.what()));
  }
  return result;
}

PromptTemplate DefaultTemplate(const Schema& schema, bool include_label) {
  std::vector<std::string> fields;
  for (int c = 0; c < schema.num_columns(); ++c) {
    if (c == schema.label_index()) continue;
    const std::string& name = schema.column(c).name;
    fields.push_back(absl::StrCat(name, ": {", name, "}"));
  }
  PromptTemplate result;
  result.id = include_label ? "default-v1" : "default-v1-nolabel";
  result.instruction = absl::StrCat(
      "Write a short, realistic emergency department clinical note for a trauma "
      "patient with the following characteristics. ",
      absl::StrJoin(fields, "; "), ".");
  if (include_label) {
    absl::StrAppend(&result.instruction, " Injury mechanism: {label}.");
  }
  absl::StrAppend(&result.instruction,
                  " Use plain clinical prose and do not list the fields verbatim.");
  return result;
}

std::string RenderValue(const ColumnSpec& spec, const Value& value) {
  if (value.is_missing()) return "unknown";
  if (spec.is_categorical()) return spec.levels[value.level()];
  return absl::StrFormat("%.1f", value.real());
}

std::string RenderRecord(const Schema& schema, const Record& record) {
  std::vector<std::string> parts;
  for (int c = 0; c < schema.num_columns(); ++c) {
    parts.push_back(
        absl::StrCat(schema.column(c).name, ": ", RenderValue(schema.column(c), record[c])));
  }
  return absl::StrJoin(parts, "; ");
}

absl::StatusOr<std::string> RenderPrompt(const PromptTemplate& prompt_template,
                                         const Schema& schema, const Record& record) {
  PSYN_RETURN_IF_ERROR(ValidateRecord(schema, record, 0));
  PSYN_RETURN_IF_ERROR(prompt_template.Validate(schema));
  std::string out;
  for (const Exemplar& e : prompt_template.exemplars) {
    absl::StrAppend(&out, "Record: ", e.record, "\nNote: ", e.note, "\n\n");
  }
  const std::string& text = prompt_template.instruction;
  size_t pos = 0;
  while (pos < text.size()) {
    const size_t open = text.find('{', pos);
    if (open == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    out.append(text, pos, open - pos);
    const size_t close = text.find('}', open);
    PSYN_ASSIGN_OR_RETURN(
        const std::string value,
        ResolvePlaceholder(text.substr(open + 1, close - open - 1), schema, record));
    out += value;
    pos = close + 1;
  }
  return out;
}

std::string FallbackNote(const Schema& schema, const Record& record,
                         const std::string& template_id, uint64_t seed,
                         bool include_label) {
  static constexpr std::array<const char*, 4> kOpenings = {
      "Patient assessed in the emergency department.",
      "Patient presented to the emergency department after an injury.",
      "Trauma patient seen on arrival.",
      "Emergency department assessment following trauma.",
  };
  static constexpr std::array<std::array<const char*, 2>, 4> kFieldForms = {{
      {"", " recorded as "},
      {"", ": "},
      {"Documented ", " was "},
      {"On assessment, ", " noted as "},
  }};
  static constexpr std::array<const char*, 3> kClosings = {
      "Further management as per trauma protocol.",
      "Plan: observation and reassessment.",
      "Disposition to be determined after review.",
  };
  Rng rng = Rng::FromSeed(seed, absl::StrCat("fallback-note/", template_id));
  std::string note = kOpenings[rng.UniformInt(kOpenings.size())];
  for (int c = 0; c < schema.num_columns(); ++c) {
    if (c == schema.label_index()) continue;
    const ColumnSpec& spec = schema.column(c);
    const auto& form = kFieldForms[rng.UniformInt(kFieldForms.size())];
    absl::StrAppend(&note, " ", form[0], spec.name, form[1], RenderValue(spec, record[c]),
                    ".");
  }
  if (include_label) {
    absl::StrAppend(&note, " Mechanism of injury: ",
                    RenderValue(schema.label_spec(), record[schema.label_index()]), ".");
  }
  absl::StrAppend(&note, " ", kClosings[rng.UniformInt(kClosings.size())]);
  return note;
}

}  // namespace psyn
