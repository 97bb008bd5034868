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

#ifndef PSYN_TABULAR_DATASET_H_
#define PSYN_TABULAR_DATASET_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "psyn/tabular/schema.h"

namespace psyn {

// A single cell: a categorical level index, a real number, or missing.
class Value {
 public:
  static Value Missing() { return Value(Kind::kMissing, 0.0); }
  static Value Level(int index) {
    return Value(Kind::kLevel, static_cast<double>(index));
  }
  static Value Real(double value) { return Value(Kind::kReal, value); }

  bool is_missing() const { return kind_ == Kind::kMissing; }
  bool is_level() const { return kind_ == Kind::kLevel; }
  bool is_real() const { return kind_ == Kind::kReal; }
  int level() const { return static_cast<int>(number_); }
  double real() const { return number_; }

  friend bool operator==(const Value&, const Value&) = default;

 private:
  enum class Kind { kMissing, kLevel, kReal };
  Value(Kind kind, double number) : kind_(kind), number_(number) {}

  Kind kind_;
  double number_;
};

using Record = std::vector<Value>;

// Where the records of a dataset came from. Only synthetic records may be
// passed on to text generation.
enum class Provenance { kReal, kSynthetic };

// Schema-validated collection of records. Immutable once constructed.
class Dataset {
 public:
  static absl::StatusOr<Dataset> Create(Schema schema,
                                        std::vector<Record> rows,
                                        Provenance provenance = Provenance::kReal);

  const Schema& schema() const { return schema_; }
  const std::vector<Record>& rows() const { return rows_; }
  const Record& row(int64_t i) const { return rows_[i]; }
  int64_t size() const { return static_cast<int64_t>(rows_.size()); }
  bool empty() const { return rows_.empty(); }
  Provenance provenance() const { return provenance_; }

  int label(int64_t row) const { return rows_[row][schema_.label_index()].level(); }
  std::vector<int> Labels() const;
  std::vector<int64_t> ClassCounts() const;

  // Rows at `indices`, in the given order.
  Dataset Subset(std::span<const int64_t> indices) const;
  Dataset WithProvenance(Provenance provenance) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  Dataset(Schema schema, std::vector<Record> rows, Provenance provenance)
      : schema_(std::move(schema)),
        rows_(std::move(rows)),
        provenance_(provenance) {}

  Schema schema_;
  std::vector<Record> rows_;
  Provenance provenance_ = Provenance::kReal;
};

// Checks one record against a schema; `row` is used only in messages.
absl::Status ValidateRecord(const Schema& schema, const Record& record,
                            int64_t row);

}  // namespace psyn

#endif  // PSYN_TABULAR_DATASET_H_
