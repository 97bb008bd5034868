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

#ifndef PSYN_TABULAR_SCHEMA_H_
#define PSYN_TABULAR_SCHEMA_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"

namespace psyn {

enum class ColumnKind { kCategorical, kContinuous };

std::string_view ColumnKindName(ColumnKind kind);

// One column of a mixed-type table. Categorical columns carry their ordered
// level list; continuous columns carry their declared range.
struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kContinuous;
  std::vector<std::string> levels;
  double min = 0.0;
  double max = 0.0;
  bool nullable = false;

  static ColumnSpec Categorical(std::string name,
                                std::vector<std::string> levels,
                                bool nullable = false);
  static ColumnSpec Continuous(std::string name, double min, double max,
                               bool nullable = false);

  bool is_categorical() const { return kind == ColumnKind::kCategorical; }
  int num_levels() const { return static_cast<int>(levels.size()); }
  std::optional<int> LevelIndex(std::string_view level) const;

  absl::Status Validate() const;

  friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

// Ordered column list plus the name of the categorical class-label column.
//
// The label column must be categorical and non-nullable: every record needs a
// class for stratified splitting and class-conditional generation.
class Schema {
 public:
  static absl::StatusOr<Schema> Create(std::vector<ColumnSpec> columns,
                                       std::string label_column);

  const std::vector<ColumnSpec>& columns() const { return columns_; }
  const ColumnSpec& column(int index) const { return columns_[index]; }
  int num_columns() const { return static_cast<int>(columns_.size()); }
  const std::string& label_column() const { return label_column_; }
  int label_index() const { return label_index_; }
  const ColumnSpec& label_spec() const { return columns_[label_index_]; }
  int num_classes() const { return label_spec().num_levels(); }

  std::optional<int> FindColumn(std::string_view name) const;

  nlohmann::json ToJson() const;
  static absl::StatusOr<Schema> FromJson(const nlohmann::json& json);

  // SHA-256 of the canonical JSON form.
  std::string Hash() const;

  friend bool operator==(const Schema&, const Schema&) = default;

 private:
  Schema(std::vector<ColumnSpec> columns, std::string label_column,
         int label_index)
      : columns_(std::move(columns)),
        label_column_(std::move(label_column)),
        label_index_(label_index) {}

  std::vector<ColumnSpec> columns_;
  std::string label_column_;
  int label_index_ = 0;
};

absl::StatusOr<Schema> LoadSchemaFile(const std::string& path);
absl::Status SaveSchemaFile(const Schema& schema, const std::string& path);

}  // namespace psyn

#endif  // PSYN_TABULAR_SCHEMA_H_
