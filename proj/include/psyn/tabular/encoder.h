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

#ifndef PSYN_TABULAR_ENCODER_H_
#define PSYN_TABULAR_ENCODER_H_

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "psyn/tabular/dataset.h"

namespace psyn {

// Transform of one feature column into a contiguous block of the encoded row.
//
// Continuous columns occupy one slot holding 2 * (v - min) / (max - min) - 1.
// Categorical columns occupy a one-hot block of num_levels slots, plus one
// trailing slot for "missing" when the column is nullable.
struct ColumnTransform {
  int column = 0;  // index into Schema::columns()
  ColumnKind kind = ColumnKind::kContinuous;
  int offset = 0;
  int width = 0;
  double min = 0.0;
  double max = 0.0;
  double impute = 0.0;  // median of observed values
  int num_levels = 0;
  bool missing_slot = false;

  friend bool operator==(const ColumnTransform&, const ColumnTransform&) = default;
};

// Fitted reversible encoding of every non-label column. The label column is
// not part of the encoded row; labels travel alongside as class indices.
class EncoderState {
 public:
  const std::vector<ColumnTransform>& transforms() const { return transforms_; }
  int width() const { return width_; }
  int num_classes() const { return num_classes_; }
  const std::string& schema_hash() const { return schema_hash_; }

  nlohmann::json ToJson() const;
  static absl::StatusOr<EncoderState> FromJson(const nlohmann::json& json);

  friend bool operator==(const EncoderState&, const EncoderState&) = default;

 private:
  friend absl::StatusOr<EncoderState> FitEncoder(const Dataset& dataset);

  std::vector<ColumnTransform> transforms_;
  int width_ = 0;
  int num_classes_ = 0;
  std::string schema_hash_;
};

struct EncodedMatrix {
  Eigen::MatrixXd values;  // n x W
  std::vector<int> labels;

  int64_t rows() const { return values.rows(); }
};

absl::StatusOr<EncoderState> FitEncoder(const Dataset& dataset);

// Applies a fitted encoder. Values outside the fitted continuous range map
// outside [-1, 1]; nothing is clamped on the way in.
absl::StatusOr<EncodedMatrix> Encode(const Dataset& dataset,
                                     const EncoderState& state);

absl::StatusOr<std::pair<EncoderState, EncodedMatrix>> FitEncode(
    const Dataset& dataset);

// Number of continuous values that fell outside their fitted range per
// schema column, counted during decoding.
struct DecodeStats {
  std::vector<int64_t> clamped;  // indexed by schema column
};

// Inverse of Encode. Categorical blocks decode by argmax over the declared
// levels (ties to the lowest index, the missing slot is never chosen);
// continuous slots decode by the inverse affine map clamped to [min, max].
absl::StatusOr<Dataset> Decode(const Eigen::MatrixXd& rows,
                               std::span<const int> labels,
                               const EncoderState& state, const Schema& schema,
                               Provenance provenance = Provenance::kReal,
                               DecodeStats* stats = nullptr);

// Maps arbitrary model output onto the encoded domain: continuous slots are
// clamped to [-1, 1] and each categorical block becomes an exact one-hot
// vector at its argmax (ties to the lowest index, declared levels only).
// `clamped`, when given, is incremented per schema column.
void ProjectToEncodedDomain(const EncoderState& state, Eigen::MatrixXd* rows,
                            std::vector<int64_t>* clamped = nullptr);

}  // namespace psyn

#endif  // PSYN_TABULAR_ENCODER_H_
