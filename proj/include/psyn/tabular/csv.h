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

#ifndef PSYN_TABULAR_CSV_H_
#define PSYN_TABULAR_CSV_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "psyn/tabular/dataset.h"
#include "psyn/tabular/schema.h"

namespace psyn {

// Raw comma-separated table: header plus string cells. Quoted fields follow
// RFC 4180 (doubled quotes, embedded commas and line breaks).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

absl::StatusOr<CsvTable> ParseCsv(std::string_view text);
absl::StatusOr<CsvTable> ReadCsvFile(const std::string& path);
std::string FormatCsv(const CsvTable& table);

// Per-column overrides for schema inference.
struct ColumnHint {
  std::optional<ColumnKind> kind;
  std::optional<std::vector<std::string>> levels;
  std::optional<bool> nullable;
};

struct InferOptions {
  // A column whose cells all parse as finite reals is continuous only when it
  // has more than this many distinct values.
  int distinct_threshold = 20;
  std::map<std::string, ColumnHint> hints;
};

absl::StatusOr<Schema> InferSchema(const std::string& csv_path,
                                   const std::string& label_column,
                                   const InferOptions& options = {});
absl::StatusOr<Schema> InferSchemaFromTable(const CsvTable& table,
                                            const std::string& label_column,
                                            const InferOptions& options = {});

// Header must name exactly the schema columns, in any order.
absl::StatusOr<Dataset> LoadDataset(const std::string& csv_path,
                                    const Schema& schema);
absl::StatusOr<Dataset> DatasetFromTable(const CsvTable& table,
                                         const Schema& schema);

// Human-readable rendering of one cell: level string, shortest round-trip
// real, or "" for missing.
std::string CellText(const ColumnSpec& spec, const Value& value);

CsvTable DatasetToTable(const Dataset& dataset);
absl::Status WriteDatasetCsv(const Dataset& dataset, const std::string& path);

}  // namespace psyn

#endif  // PSYN_TABULAR_CSV_H_
