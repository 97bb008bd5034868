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

#include "psyn/tabular/dataset.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "psyn/common/status_macros.h"

namespace psyn {

absl::Status ValidateRecord(const Schema& schema, const Record& record,
                            int64_t row) {
  if (static_cast<int>(record.size()) != schema.num_columns()) {
    return absl::InvalidArgumentError(
        absl::StrCat("row ", row, ": expected ", schema.num_columns(),
                     " values, got ", record.size()));
  }
  for (int c = 0; c < schema.num_columns(); ++c) {
    const ColumnSpec& spec = schema.column(c);
    const Value& value = record[c];
    if (value.is_missing()) {
      if (!spec.nullable) {
        return absl::InvalidArgumentError(absl::StrCat(
            "row ", row, ", column '", spec.name,
            "': missing value in non-nullable column"));
      }
      continue;
    }
    if (spec.is_categorical()) {
      if (!value.is_level() || value.level() < 0 ||
          value.level() >= spec.num_levels()) {
        return absl::InvalidArgumentError(
            absl::StrCat("row ", row, ", column '", spec.name,
                         "': invalid categorical level"));
      }
    } else if (!value.is_real() || !std::isfinite(value.real())) {
      return absl::InvalidArgumentError(absl::StrCat(
          "row ", row, ", column '", spec.name, "': non-finite value"));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<Dataset> Dataset::Create(Schema schema, std::vector<Record> rows,
                                        Provenance provenance) {
  for (size_t r = 0; r < rows.size(); ++r) {
    PSYN_RETURN_IF_ERROR(ValidateRecord(schema, rows[r], static_cast<int64_t>(r)));
  }
  return Dataset(std::move(schema), std::move(rows), provenance);
}

std::vector<int> Dataset::Labels() const {
  std::vector<int> labels;
  labels.reserve(rows_.size());
  for (const Record& record : rows_) {
    labels.push_back(record[schema_.label_index()].level());
  }
  return labels;
}

std::vector<int64_t> Dataset::ClassCounts() const {
  std::vector<int64_t> counts(schema_.num_classes(), 0);
  for (const Record& record : rows_) ++counts[record[schema_.label_index()].level()];
  return counts;
}

Dataset Dataset::Subset(std::span<const int64_t> indices) const {
  std::vector<Record> rows;
  rows.reserve(indices.size());
  for (int64_t i : indices) rows.push_back(rows_[i]);
  return Dataset(schema_, std::move(rows), provenance_);
}

Dataset Dataset::WithProvenance(Provenance provenance) const {
  return Dataset(schema_, rows_, provenance);
}

}  // namespace psyn
