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

#include "psyn/pipeline/benchmark.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "psyn/common/status_macros.h"
#include "psyn/synthesis/synthesis.h"

namespace psyn {
namespace {

constexpr int kMechanisms = 5;

struct ContinuousFeature {
  const char* name;
  double min, max, mean, sd;
  std::array<double, kMechanisms> shift;
  double loading;  // on the latent severity factor
  double missing;
};

struct CategoricalFeature {
  const char* name;
  std::vector<std::string> levels;
  std::vector<double> logits;
  std::array<int, kMechanisms> favored;  // level boosted per class, -1 for none
  int severe_level;                      // level boosted by latent severity, -1 for none
  double missing;
};

const std::vector<ContinuousFeature>& ContinuousFeatures() {
  static const auto* features = new std::vector<ContinuousFeature>{
      {"age", 16, 100, 45, 18, {-5, 8, -8, -12, -14}, 0.0, 0.0},
      {"arrival_hour", 0, 23.9, 14, 5, {-3, 0, 1, 6, 4}, 0.0, 0.0},
      {"heart_rate", 30, 200, 85, 12, {2, 0, 6, 5, 4}, 8.0, 0.0},
      {"systolic_bp", 60, 220, 130, 16, {0, 6, -2, 0, -3}, -6.0, 0.0},
      {"diastolic_bp", 30, 130, 78, 10, {0, 3, -1, 0, -2}, -4.0, 0.0},
      {"respiratory_rate", 6, 45, 17, 3, {0, 0, 1, 1, 1}, 2.0, 0.0},
      {"spo2", 70, 100, 97, 1.8, {0, 0, -0.5, -0.3, -0.5}, -1.0, 0.05},
      {"temperature", 34, 41, 36.8, 0.4, {0, 0, -0.1, 0, 0}, 0.0, 0.0},
      {"gcs", 3, 15, 14.4, 0.8, {0, 0, -0.5, -0.8, -1.0}, -1.0, 0.0},
      {"pain_score", 0, 10, 5, 2, {0.5, 0, 1, 0.5, -0.5}, 1.0, 0.08},
      {"length_of_stay_h", 0.5, 240, 8, 6, {0, 1, 6, 2, 10}, 5.0, 0.0},
      {"bmi", 14, 50, 26, 4.5, {0, 0.5, 0, -0.5, -1}, 0.0, 0.10},
  };
  return *features;
}

const std::vector<CategoricalFeature>& CategoricalFeatures() {
  static const auto* features = new std::vector<CategoricalFeature>{
      {"sex", {"female", "male"}, {0, 0}, {1, -1, 1, 1, 0}, -1, 0.0},
      {"weekday", {"mon", "tue", "wed", "thu", "fri", "sat", "sun"},
       {0, 0, 0, 0, 0, 0.2, 0.2}, {2, -1, -1, 5, -1}, -1, 0.0},
      {"arrival_mode", {"walk-in", "ambulance", "police", "helicopter"},
       {1, 0.5, -1.5, -3}, {-1, 0, 1, 2, 1}, 3, 0.0},
      {"admission_mode", {"discharged", "ward", "icu", "surgery"},
       {1.5, 0.5, -1.5, -0.5}, {3, -1, 2, -1, 1}, 2, 0.0},
      {"injury_region",
       {"head", "thorax", "abdomen", "upper limb", "lower limb", "spine"},
       {0, 0, -0.5, 0.3, 0.3, -0.8}, {3, 4, 1, 0, 3}, -1, 0.0},
      {"injury_severity", {"minor", "moderate", "severe"}, {1, 0, -1.5}, {-1, 0, 2, -1, 1},
       2, 0.0},
      {"fracture", {"no", "yes"}, {0.5, 0}, {1, 1, 1, -1, -1}, -1, 0.0},
      {"alcohol", {"no", "yes"}, {1, -1}, {0, -1, 1, 1, 1}, -1, 0.15},
      {"triage_level", {"1", "2", "3", "4", "5"}, {-2, -1, 0.5, 0.8, 0}, {3, 3, 1, 2, 1}, 0,
       0.0},
      {"imaging", {"none", "x-ray", "ct", "mri"}, {0.5, 0.5, -0.5, -2}, {1, 1, 2, 2, 0}, 2,
       0.0},
      {"season", {"winter", "spring", "summer", "autumn"}, {0, 0, 0, 0}, {-1, 0, 2, 2, -1},
       -1, 0.0},
      {"work_status", {"employed", "unemployed", "retired", "student"},
       {0.8, -0.2, 0, -0.5}, {0, 2, 0, 1, 1}, -1, 0.0},
  };
  return *features;
}

constexpr double kClassBoost = 1.5;
constexpr double kSeverityBoost = 1.2;

double Round1(double v) { return std::round(v * 10.0) / 10.0; }

int SampleCategorical(const std::vector<double>& logits, Rng& rng) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> weights(logits.size());
  double total = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) total += weights[i] = std::exp(logits[i] - m);
  double u = rng.Uniform() * total;
  for (size_t i = 0; i < weights.size(); ++i) {
    u -= weights[i];
    if (u < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

absl::StatusOr<std::vector<int64_t>> ClassCounts(int64_t rows,
                                                 std::span<const double> shares,
                                                 int num_classes) {
  if (rows < 1) return absl::InvalidArgumentError("benchmark needs at least one row");
  if (static_cast<int>(shares.size()) != num_classes) {
    return absl::InvalidArgumentError(absl::StrCat("benchmark expects ", num_classes,
                                                   " class shares, got ", shares.size()));
  }
  return LargestRemainder(shares, rows);
}

// Labels with the given counts, shuffled.
std::vector<int> ShuffledLabels(std::span<const int64_t> counts, Rng& rng) {
  std::vector<int> labels;
  for (size_t y = 0; y < counts.size(); ++y) labels.insert(labels.end(), counts[y], y);
  rng.Shuffle(labels);
  return labels;
}

}  // namespace

std::vector<std::string> TraumaMechanisms() {
  return {"occupational accident", "accident of daily life", "road traffic accident",
          "assault", "self-harm"};
}

std::vector<double> TraumaClassShares() { return {0.15, 0.55, 0.20, 0.075, 0.025}; }

Schema TraumaSchema() {
  std::vector<ColumnSpec> columns;
  columns.push_back(ColumnSpec::Categorical("mechanism", TraumaMechanisms()));
  for (const ContinuousFeature& f : ContinuousFeatures()) {
    columns.push_back(ColumnSpec::Continuous(f.name, f.min, f.max, f.missing > 0.0));
  }
  for (const CategoricalFeature& f : CategoricalFeatures()) {
    columns.push_back(ColumnSpec::Categorical(f.name, f.levels, f.missing > 0.0));
  }
  return *Schema::Create(std::move(columns), "mechanism");
}

absl::StatusOr<Dataset> GenerateTraumaBenchmark(int64_t rows,
                                                std::span<const double> class_shares,
                                                uint64_t seed) {
  PSYN_ASSIGN_OR_RETURN(const std::vector<int64_t> counts,
                        ClassCounts(rows, class_shares, kMechanisms));
  Rng label_rng = Rng::FromSeed(seed, "bench/labels");
  const std::vector<int> labels = ShuffledLabels(counts, label_rng);
  Rng rng = Rng::FromSeed(seed, "bench/rows");
  const Schema schema = TraumaSchema();
  std::vector<Record> records;
  records.reserve(rows);
  for (int y : labels) {
    Record record;
    record.reserve(schema.num_columns());
    record.push_back(Value::Level(y));
    const double severity = rng.Normal() + (y == 2 || y == 4 ? 0.5 : 0.0);
    for (const ContinuousFeature& f : ContinuousFeatures()) {
      const double v = f.mean + f.shift[y] + f.loading * severity + f.sd * rng.Normal();
      const bool missing = f.missing > 0.0 && rng.Bernoulli(f.missing);
      record.push_back(missing ? Value::Missing() : Value::Real(Round1(std::clamp(v, f.min, f.max))));
    }
    for (const CategoricalFeature& f : CategoricalFeatures()) {
      std::vector<double> logits = f.logits;
      if (f.favored[y] >= 0) logits[f.favored[y]] += kClassBoost;
      if (f.severe_level >= 0) logits[f.severe_level] += kSeverityBoost * severity;
      const int level = SampleCategorical(logits, rng);
      const bool missing = f.missing > 0.0 && rng.Bernoulli(f.missing);
      record.push_back(missing ? Value::Missing() : Value::Level(level));
    }
    records.push_back(std::move(record));
  }
  return Dataset::Create(schema, std::move(records));
}

MixtureOracle MixtureOracle::Default() {
  MixtureOracle oracle;
  oracle.means = {{-4.0, 0.0}, {0.0, 3.0}, {3.0, -2.0}};
  return oracle;
}

Schema MixtureOracle::schema() const {
  std::vector<std::string> levels;
  for (int y = 0; y < num_classes(); ++y) levels.push_back(absl::StrCat("c", y));
  return *Schema::Create({ColumnSpec::Categorical("component", levels),
                          ColumnSpec::Continuous("x1", min, max),
                          ColumnSpec::Continuous("x2", min, max)},
                         "component");
}

absl::StatusOr<Dataset> MixtureOracle::Sample(std::span<const int64_t> counts,
                                              Rng& rng) const {
  if (static_cast<int>(counts.size()) != num_classes()) {
    return absl::InvalidArgumentError("one count per mixture component required");
  }
  std::vector<Record> records;
  for (int y = 0; y < num_classes(); ++y) {
    for (int64_t i = 0; i < counts[y]; ++i) {
      Record record = {Value::Level(y)};
      for (int d = 0; d < 2; ++d) {
        record.push_back(
            Value::Real(std::clamp(means[y][d] + stddev * rng.Normal(), min, max)));
      }
      records.push_back(std::move(record));
    }
  }
  return Dataset::Create(schema(), std::move(records));
}

absl::StatusOr<Dataset> GenerateMixtureBenchmark(int64_t rows,
                                                 std::span<const double> class_shares,
                                                 uint64_t seed) {
  const MixtureOracle oracle = MixtureOracle::Default();
  PSYN_ASSIGN_OR_RETURN(const std::vector<int64_t> counts,
                        ClassCounts(rows, class_shares, oracle.num_classes()));
  Rng rng = Rng::FromSeed(seed, "bench/mixture");
  PSYN_ASSIGN_OR_RETURN(const Dataset ordered, oracle.Sample(counts, rng));
  std::vector<int64_t> order(ordered.size());
  for (int64_t i = 0; i < ordered.size(); ++i) order[i] = i;
  Rng shuffle = Rng::FromSeed(seed, "bench/labels");
  shuffle.Shuffle(order);
  return ordered.Subset(order);
}

absl::StatusOr<Dataset> GenerateBenchmark(const std::string& preset, int64_t rows,
                                          std::span<const double> class_shares,
                                          uint64_t seed) {
  if (preset == "trauma") {
    const std::vector<double> defaults = TraumaClassShares();
    return GenerateTraumaBenchmark(rows, class_shares.empty() ? std::span<const double>(defaults) : class_shares,
                                   seed);
  }
  if (preset == "mixture") {
    const std::vector<double> defaults(MixtureOracle::Default().num_classes(), 1.0);
    return GenerateMixtureBenchmark(rows, class_shares.empty() ? std::span<const double>(defaults) : class_shares,
                                    seed);
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown benchmark preset '", preset, "'"));
}

}  // namespace psyn
