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

#include "psyn/tabular/encoder.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "psyn/common/status_macros.h"

namespace psyn {
namespace {

double Median(std::vector<double> values) {
  const size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

int ArgmaxLevel(const Eigen::MatrixXd& rows, int64_t r, const ColumnTransform& t) {
  int best = 0;
  for (int k = 1; k < t.num_levels; ++k) {
    if (rows(r, t.offset + k) > rows(r, t.offset + best)) best = k;
  }
  return best;
}

}  // namespace

nlohmann::json EncoderState::ToJson() const {
  nlohmann::json transforms = nlohmann::json::array();
  for (const ColumnTransform& t : transforms_) {
    transforms.push_back({{"column", t.column},
                          {"kind", std::string(ColumnKindName(t.kind))},
                          {"offset", t.offset},
                          {"width", t.width},
                          {"min", t.min},
                          {"max", t.max},
                          {"impute", t.impute},
                          {"num_levels", t.num_levels},
                          {"missing_slot", t.missing_slot}});
  }
  return {{"transforms", std::move(transforms)},
          {"width", width_},
          {"num_classes", num_classes_},
          {"schema_hash", schema_hash_}};
}

absl::StatusOr<EncoderState> EncoderState::FromJson(const nlohmann::json& json) {
  EncoderState state;
  try {
    for (const nlohmann::json& item : json.at("transforms")) {
      ColumnTransform t;
      t.column = item.at("column").get<int>();
      t.kind = item.at("kind").get<std::string>() == "categorical"
                   ? ColumnKind::kCategorical
                   : ColumnKind::kContinuous;
      t.offset = item.at("offset").get<int>();
      t.width = item.at("width").get<int>();
      t.min = item.at("min").get<double>();
      t.max = item.at("max").get<double>();
      t.impute = item.at("impute").get<double>();
      t.num_levels = item.at("num_levels").get<int>();
      t.missing_slot = item.at("missing_slot").get<bool>();
      state.transforms_.push_back(t);
    }
    state.width_ = json.at("width").get<int>();
    state.num_classes_ = json.at("num_classes").get<int>();
    state.schema_hash_ = json.at("schema_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed encoder state: ", e.what()));
  }
  int expected_offset = 0;
  for (const ColumnTransform& t : state.transforms_) {
    if (t.offset != expected_offset || t.width <= 0) {
      return absl::InvalidArgumentError("encoder blocks are not contiguous");
    }
    expected_offset += t.width;
  }
  if (expected_offset != state.width_) {
    return absl::InvalidArgumentError("encoder blocks do not cover the width");
  }
  return state;
}

absl::StatusOr<EncoderState> FitEncoder(const Dataset& dataset) {
  if (dataset.empty()) {
    return absl::InvalidArgumentError("cannot fit an encoder on an empty dataset");
  }
  const Schema& schema = dataset.schema();
  if (schema.num_columns() < 2) {
    return absl::InvalidArgumentError(
        "encoding needs at least one feature column besides the label");
  }
  EncoderState state;
  int offset = 0;
  for (int c = 0; c < schema.num_columns(); ++c) {
    if (c == schema.label_index()) continue;
    const ColumnSpec& spec = schema.column(c);
    ColumnTransform t;
    t.column = c;
    t.kind = spec.kind;
    t.offset = offset;
    if (spec.is_categorical()) {
      t.num_levels = spec.num_levels();
      t.missing_slot = spec.nullable;
      t.width = t.num_levels + (t.missing_slot ? 1 : 0);
    } else {
      std::vector<double> observed;
      observed.reserve(dataset.size());
      for (const Record& record : dataset.rows()) {
        if (!record[c].is_missing()) observed.push_back(record[c].real());
      }
      if (observed.empty()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "continuous column '", spec.name, "' has no observed values"));
      }
      const auto [lo, hi] = std::minmax_element(observed.begin(), observed.end());
      t.min = *lo;
      t.max = *hi;
      if (!(t.min < t.max)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "continuous column '", spec.name,
            "' is constant; remove it from the schema before encoding"));
      }
      t.impute = Median(std::move(observed));
      t.width = 1;
    }
    offset += t.width;
    state.transforms_.push_back(t);
  }
  state.width_ = offset;
  state.num_classes_ = schema.num_classes();
  state.schema_hash_ = schema.Hash();
  return state;
}

absl::StatusOr<EncodedMatrix> Encode(const Dataset& dataset,
                                     const EncoderState& state) {
  if (dataset.schema().Hash() != state.schema_hash()) {
    return absl::InvalidArgumentError(
        "dataset schema does not match the encoder's schema");
  }
  EncodedMatrix encoded;
  encoded.values = Eigen::MatrixXd::Zero(dataset.size(), state.width());
  encoded.labels = dataset.Labels();
  for (int64_t r = 0; r < dataset.size(); ++r) {
    const Record& record = dataset.row(r);
    for (const ColumnTransform& t : state.transforms()) {
      const Value& value = record[t.column];
      if (t.kind == ColumnKind::kCategorical) {
        const int slot = value.is_missing() ? t.num_levels : value.level();
        encoded.values(r, t.offset + slot) = 1.0;
      } else {
        const double v = value.is_missing() ? t.impute : value.real();
        encoded.values(r, t.offset) = 2.0 * (v - t.min) / (t.max - t.min) - 1.0;
      }
    }
  }
  return encoded;
}

absl::StatusOr<std::pair<EncoderState, EncodedMatrix>> FitEncode(
    const Dataset& dataset) {
  PSYN_ASSIGN_OR_RETURN(EncoderState state, FitEncoder(dataset));
  PSYN_ASSIGN_OR_RETURN(EncodedMatrix encoded, Encode(dataset, state));
  return std::make_pair(std::move(state), std::move(encoded));
}

absl::StatusOr<Dataset> Decode(const Eigen::MatrixXd& rows,
                               std::span<const int> labels,
                               const EncoderState& state, const Schema& schema,
                               Provenance provenance, DecodeStats* stats) {
  if (rows.cols() != state.width()) {
    return absl::InvalidArgumentError(
        absl::StrCat("encoded width mismatch: rows have ", rows.cols(),
                     " columns, encoder expects ", state.width()));
  }
  if (static_cast<int64_t>(labels.size()) != rows.rows()) {
    return absl::InvalidArgumentError(
        absl::StrCat("got ", labels.size(), " labels for ", rows.rows(), " rows"));
  }
  if (schema.Hash() != state.schema_hash()) {
    return absl::InvalidArgumentError("schema does not match the encoder's schema");
  }
  if (stats != nullptr) stats->clamped.assign(schema.num_columns(), 0);
  std::vector<Record> records;
  records.reserve(rows.rows());
  for (int64_t r = 0; r < rows.rows(); ++r) {
    Record record(schema.num_columns(), Value::Missing());
    if (labels[r] < 0 || labels[r] >= schema.num_classes()) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", r, ": invalid class index ", labels[r]));
    }
    record[schema.label_index()] = Value::Level(labels[r]);
    for (const ColumnTransform& t : state.transforms()) {
      if (t.kind == ColumnKind::kCategorical) {
        record[t.column] = Value::Level(ArgmaxLevel(rows, r, t));
        continue;
      }
      const double encoded = rows(r, t.offset);
      if (!std::isfinite(encoded)) {
        return absl::InvalidArgumentError(
            absl::StrCat("row ", r, ": non-finite encoded value for column '",
                         schema.column(t.column).name, "'"));
      }
      if ((encoded < -1.0 || encoded > 1.0) && stats != nullptr) {
        ++stats->clamped[t.column];
      }
      const double v = t.min + (encoded + 1.0) * 0.5 * (t.max - t.min);
      record[t.column] = Value::Real(std::clamp(v, t.min, t.max));
    }
    records.push_back(std::move(record));
  }
  return Dataset::Create(schema, std::move(records), provenance);
}

void ProjectToEncodedDomain(const EncoderState& state, Eigen::MatrixXd* rows,
                            std::vector<int64_t>* clamped) {
  if (clamped != nullptr) {
    for (const ColumnTransform& t : state.transforms()) {
      if (static_cast<int>(clamped->size()) <= t.column) clamped->resize(t.column + 1, 0);
    }
  }
  for (int64_t r = 0; r < rows->rows(); ++r) {
    for (const ColumnTransform& t : state.transforms()) {
      if (t.kind == ColumnKind::kCategorical) {
        const int best = ArgmaxLevel(*rows, r, t);
        rows->block(r, t.offset, 1, t.width).setZero();
        (*rows)(r, t.offset + best) = 1.0;
      } else {
        double& v = (*rows)(r, t.offset);
        if (v < -1.0 || v > 1.0 || std::isnan(v)) {
          v = std::isnan(v) ? 0.0 : std::clamp(v, -1.0, 1.0);
          if (clamped != nullptr) ++(*clamped)[t.column];
        }
      }
    }
  }
}

}  // namespace psyn
