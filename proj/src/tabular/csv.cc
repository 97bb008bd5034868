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

#include "psyn/tabular/csv.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include "absl/strings/str_cat.h"
#include "psyn/common/files.h"
#include "psyn/common/status_macros.h"

namespace psyn {
namespace {

bool NeedsQuoting(std::string_view field) {
  if (field.empty()) return false;
  if (field.front() == ' ' || field.back() == ' ') return true;
  return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

void AppendField(std::string_view field, std::string* out) {
  if (!NeedsQuoting(field)) {
    out->append(field);
    return;
  }
  out->push_back('"');
  for (char c : field) {
    if (c == '"') out->push_back('"');
    out->push_back(c);
  }
  out->push_back('"');
}

std::optional<double> ParseReal(std::string_view cell) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  if (begin != end && *begin == '+') ++begin;
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

absl::StatusOr<CsvTable> ParseCsv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  int64_t line = 1;
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) {
          return absl::InvalidArgumentError(
              absl::StrCat("line ", line, ": stray quote inside unquoted field"));
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        if (field_started || !field.empty() || !record.empty()) {
          record.push_back(std::move(field));
          records.push_back(std::move(record));
        }
        field.clear();
        record.clear();
        field_started = false;
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) return absl::InvalidArgumentError("unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  if (records.empty()) return absl::InvalidArgumentError("CSV has no header row");

  CsvTable table;
  table.header = std::move(records.front());
  for (size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "data row ", r, " has ", records[r].size(), " fields, header has ",
          table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

absl::StatusOr<CsvTable> ReadCsvFile(const std::string& path) {
  PSYN_ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  absl::StatusOr<CsvTable> table = ParseCsv(text);
  if (!table.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": ", table.status().message()));
  }
  return table;
}

std::string FormatCsv(const CsvTable& table) {
  std::string out;
  auto append_record = [&out](const std::vector<std::string>& record) {
    for (size_t i = 0; i < record.size(); ++i) {
      if (i > 0) out.push_back(',');
      AppendField(record[i], &out);
    }
    out.push_back('\n');
  };
  append_record(table.header);
  for (const auto& row : table.rows) append_record(row);
  return out;
}

absl::StatusOr<Schema> InferSchemaFromTable(const CsvTable& table,
                                            const std::string& label_column,
                                            const InferOptions& options) {
  if (table.rows.empty()) {
    return absl::InvalidArgumentError("CSV has a header but no data rows");
  }
  if (std::find(table.header.begin(), table.header.end(), label_column) ==
      table.header.end()) {
    return absl::InvalidArgumentError(
        absl::StrCat("label column '", label_column, "' not found in header"));
  }
  std::vector<ColumnSpec> columns;
  for (size_t c = 0; c < table.header.size(); ++c) {
    const std::string& name = table.header[c];
    std::set<std::string> distinct;
    bool any_empty = false;
    bool all_numeric = true;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& row : table.rows) {
      const std::string& cell = row[c];
      if (cell.empty()) {
        any_empty = true;
        continue;
      }
      distinct.insert(cell);
      if (all_numeric) {
        if (std::optional<double> v = ParseReal(cell)) {
          lo = std::min(lo, *v);
          hi = std::max(hi, *v);
        } else {
          all_numeric = false;
        }
      }
    }
    if (distinct.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("column '", name, "' has no non-empty cells"));
    }
    const auto hint_it = options.hints.find(name);
    const ColumnHint* hint =
        hint_it == options.hints.end() ? nullptr : &hint_it->second;

    ColumnKind kind = all_numeric && static_cast<int>(distinct.size()) >
                                         options.distinct_threshold
                          ? ColumnKind::kContinuous
                          : ColumnKind::kCategorical;
    if (name == label_column) kind = ColumnKind::kCategorical;
    if (hint != nullptr && hint->kind.has_value()) kind = *hint->kind;
    bool nullable = any_empty;
    if (hint != nullptr && hint->nullable.has_value()) nullable = *hint->nullable;

    if (kind == ColumnKind::kContinuous) {
      if (!all_numeric) {
        return absl::InvalidArgumentError(absl::StrCat(
            "column '", name, "' is declared continuous but has non-numeric cells"));
      }
      columns.push_back(ColumnSpec::Continuous(name, lo, hi, nullable));
    } else {
      std::vector<std::string> levels(distinct.begin(), distinct.end());
      if (hint != nullptr && hint->levels.has_value()) levels = *hint->levels;
      columns.push_back(
          ColumnSpec::Categorical(name, std::move(levels), nullable));
    }
  }
  return Schema::Create(std::move(columns), label_column);
}

absl::StatusOr<Schema> InferSchema(const std::string& csv_path,
                                   const std::string& label_column,
                                   const InferOptions& options) {
  PSYN_ASSIGN_OR_RETURN(CsvTable table, ReadCsvFile(csv_path));
  return InferSchemaFromTable(table, label_column, options);
}

absl::StatusOr<Dataset> DatasetFromTable(const CsvTable& table,
                                         const Schema& schema) {
  if (static_cast<int>(table.header.size()) != schema.num_columns()) {
    return absl::InvalidArgumentError(
        absl::StrCat("header has ", table.header.size(),
                     " columns, schema has ", schema.num_columns()));
  }
  // source_of[c] = CSV field index that holds schema column c.
  std::vector<int> source_of(schema.num_columns(), -1);
  for (size_t f = 0; f < table.header.size(); ++f) {
    std::optional<int> c = schema.FindColumn(table.header[f]);
    if (!c.has_value()) {
      return absl::InvalidArgumentError(
          absl::StrCat("header column '", table.header[f], "' not in schema"));
    }
    if (source_of[*c] != -1) {
      return absl::InvalidArgumentError(
          absl::StrCat("header repeats column '", table.header[f], "'"));
    }
    source_of[*c] = static_cast<int>(f);
  }

  std::vector<Record> rows;
  rows.reserve(table.rows.size());
  for (size_t r = 0; r < table.rows.size(); ++r) {
    // Row numbers in messages are 1-based data rows (header excluded).
    const size_t row_number = r + 1;
    Record record;
    record.reserve(schema.num_columns());
    for (int c = 0; c < schema.num_columns(); ++c) {
      const ColumnSpec& spec = schema.column(c);
      const std::string& cell = table.rows[r][source_of[c]];
      if (cell.empty()) {
        if (!spec.nullable) {
          return absl::InvalidArgumentError(
              absl::StrCat("row ", row_number, ", column '", spec.name,
                           "': missing value in non-nullable column"));
        }
        record.push_back(Value::Missing());
      } else if (spec.is_categorical()) {
        std::optional<int> level = spec.LevelIndex(cell);
        if (!level.has_value()) {
          return absl::InvalidArgumentError(
              absl::StrCat("row ", row_number, ", column '", spec.name,
                           "': unknown level '", cell, "'"));
        }
        record.push_back(Value::Level(*level));
      } else {
        std::optional<double> v = ParseReal(cell);
        if (!v.has_value()) {
          return absl::InvalidArgumentError(
              absl::StrCat("row ", row_number, ", column '", spec.name,
                           "': cannot parse '", cell, "' as a number"));
        }
        record.push_back(Value::Real(*v));
      }
    }
    rows.push_back(std::move(record));
  }
  return Dataset::Create(schema, std::move(rows));
}

absl::StatusOr<Dataset> LoadDataset(const std::string& csv_path,
                                    const Schema& schema) {
  PSYN_ASSIGN_OR_RETURN(CsvTable table, ReadCsvFile(csv_path));
  absl::StatusOr<Dataset> dataset = DatasetFromTable(table, schema);
  if (!dataset.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat(csv_path, ": ", dataset.status().message()));
  }
  return dataset;
}

std::string CellText(const ColumnSpec& spec, const Value& value) {
  if (value.is_missing()) return "";
  if (spec.is_categorical()) return spec.levels[value.level()];
  return FormatDouble(value.real());
}

CsvTable DatasetToTable(const Dataset& dataset) {
  CsvTable table;
  const Schema& schema = dataset.schema();
  for (const ColumnSpec& spec : schema.columns()) table.header.push_back(spec.name);
  table.rows.reserve(dataset.size());
  for (const Record& record : dataset.rows()) {
    std::vector<std::string> cells;
    cells.reserve(record.size());
    for (int c = 0; c < schema.num_columns(); ++c) {
      cells.push_back(CellText(schema.column(c), record[c]));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

absl::Status WriteDatasetCsv(const Dataset& dataset, const std::string& path) {
  return WriteFile(path, FormatCsv(DatasetToTable(dataset)));
}

}  // namespace psyn
