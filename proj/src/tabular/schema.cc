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

#include "psyn/tabular/schema.h"

#include <cmath>
#include <set>

#include "absl/strings/str_cat.h"
#include "psyn/common/files.h"
#include "psyn/common/status_macros.h"

namespace psyn {

std::string_view ColumnKindName(ColumnKind kind) {
  return kind == ColumnKind::kCategorical ? "categorical" : "continuous";
}

ColumnSpec ColumnSpec::Categorical(std::string name,
                                   std::vector<std::string> levels,
                                   bool nullable) {
  ColumnSpec spec;
  spec.name = std::move(name);
  spec.kind = ColumnKind::kCategorical;
  spec.levels = std::move(levels);
  spec.nullable = nullable;
  return spec;
}

ColumnSpec ColumnSpec::Continuous(std::string name, double min, double max,
                                  bool nullable) {
  ColumnSpec spec;
  spec.name = std::move(name);
  spec.kind = ColumnKind::kContinuous;
  spec.min = min;
  spec.max = max;
  spec.nullable = nullable;
  return spec;
}

std::optional<int> ColumnSpec::LevelIndex(std::string_view level) const {
  for (size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == level) return static_cast<int>(i);
  }
  return std::nullopt;
}

absl::Status ColumnSpec::Validate() const {
  if (name.empty()) return absl::InvalidArgumentError("column name is empty");
  if (is_categorical()) {
    if (levels.size() < 2) {
      return absl::InvalidArgumentError(absl::StrCat(
          "categorical column '", name, "' needs at least 2 levels, has ",
          levels.size()));
    }
    std::set<std::string_view> seen;
    for (const std::string& level : levels) {
      if (level.empty()) {
        return absl::InvalidArgumentError(
            absl::StrCat("column '", name, "' has an empty level"));
      }
      if (!seen.insert(level).second) {
        return absl::InvalidArgumentError(absl::StrCat(
            "column '", name, "' has duplicate level '", level, "'"));
      }
    }
  } else {
    if (!std::isfinite(min) || !std::isfinite(max) || !(min < max)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "continuous column '", name, "' needs finite min < max, got [", min,
          ", ", max, "]"));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<Schema> Schema::Create(std::vector<ColumnSpec> columns,
                                      std::string label_column) {
  std::set<std::string_view> names;
  std::optional<int> label_index;
  for (size_t i = 0; i < columns.size(); ++i) {
    PSYN_RETURN_IF_ERROR(columns[i].Validate());
    if (!names.insert(columns[i].name).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate column name '", columns[i].name, "'"));
    }
    if (columns[i].name == label_column) label_index = static_cast<int>(i);
  }
  if (!label_index.has_value()) {
    return absl::InvalidArgumentError(
        absl::StrCat("label column '", label_column, "' not in schema"));
  }
  const ColumnSpec& label = columns[*label_index];
  if (!label.is_categorical()) {
    return absl::InvalidArgumentError(
        absl::StrCat("label column '", label_column, "' must be categorical"));
  }
  if (label.nullable) {
    return absl::InvalidArgumentError(absl::StrCat(
        "label column '", label_column, "' must not contain missing values"));
  }
  return Schema(std::move(columns), std::move(label_column), *label_index);
}

std::optional<int> Schema::FindColumn(std::string_view name) const {
  for (size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

nlohmann::json Schema::ToJson() const {
  nlohmann::json columns = nlohmann::json::array();
  for (const ColumnSpec& spec : columns_) {
    nlohmann::json column;
    column["name"] = spec.name;
    column["kind"] = std::string(ColumnKindName(spec.kind));
    if (spec.is_categorical()) {
      column["levels"] = spec.levels;
    } else {
      column["min"] = spec.min;
      column["max"] = spec.max;
    }
    column["nullable"] = spec.nullable;
    columns.push_back(std::move(column));
  }
  return {{"columns", std::move(columns)}, {"label_column", label_column_}};
}

absl::StatusOr<Schema> Schema::FromJson(const nlohmann::json& json) {
  try {
    std::vector<ColumnSpec> columns;
    for (const nlohmann::json& column : json.at("columns")) {
      const std::string kind = column.at("kind").get<std::string>();
      const std::string name = column.at("name").get<std::string>();
      const bool nullable = column.value("nullable", false);
      if (kind == "categorical") {
        columns.push_back(ColumnSpec::Categorical(
            name, column.at("levels").get<std::vector<std::string>>(),
            nullable));
      } else if (kind == "continuous") {
        columns.push_back(ColumnSpec::Continuous(
            name, column.at("min").get<double>(),
            column.at("max").get<double>(), nullable));
      } else {
        return absl::InvalidArgumentError(
            absl::StrCat("column '", name, "' has unknown kind '", kind, "'"));
      }
    }
    return Create(std::move(columns),
                  json.at("label_column").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed schema document: ", e.what()));
  }
}

std::string Schema::Hash() const { return Sha256Hex(ToJson().dump()); }

absl::StatusOr<Schema> LoadSchemaFile(const std::string& path) {
  PSYN_ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  nlohmann::json json = nlohmann::json::parse(text, nullptr, false);
  if (json.is_discarded()) {
    return absl::InvalidArgumentError(
        absl::StrCat("schema file is not valid JSON: ", path));
  }
  return Schema::FromJson(json);
}

absl::Status SaveSchemaFile(const Schema& schema, const std::string& path) {
  return WriteFile(path, schema.ToJson().dump(2) + "\n");
}

}  // namespace psyn
