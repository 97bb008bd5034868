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

#ifndef PSYN_EVAL_FIDELITY_H_
#define PSYN_EVAL_FIDELITY_H_

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "psyn/tabular/dataset.h"

namespace psyn {

// Wasserstein-1 distance between two empirical distributions, computed as
// the integral of |F_a - F_b| over the merged support.
absl::StatusOr<double> Wasserstein1(std::span<const double> a, std::span<const double> b);

struct KsResult {
  double statistic = 0.0;  // sup |F_a - F_b|
  double p_value = 1.0;
};

// Survival function of the Kolmogorov distribution, P(K > lambda).
double KolmogorovSurvival(double lambda);

// Two-sample KS test with the asymptotic p-value at
// lambda = D * sqrt(n m / (n + m)).
absl::StatusOr<KsResult> KolmogorovSmirnov(std::span<const double> a,
                                           std::span<const double> b);

// Fraction of label permutations of the pooled sample whose statistic is at
// least the observed one, with the (count + 1) / (permutations + 1) estimator.
absl::StatusOr<double> KsPermutationPValue(std::span<const double> a,
                                           std::span<const double> b,
                                           int permutations, uint64_t seed);

// 0.5 * sum |p - q| over two frequency vectors of equal length. Each vector is
// normalized by its own sum.
absl::StatusOr<double> TotalVariation(std::span<const double> p, std::span<const double> q);

struct CorrelationDiff {
  bool applicable = false;
  double max_abs_diff = 0.0;
  // Columns with zero variance in either sample (correlation taken as 0).
  std::vector<std::string> constant_columns;
};

// Pearson correlation of every column pair in each matrix, compared. Rows
// with a missing value (NaN) in either column of a pair are dropped for that
// pair.
absl::StatusOr<CorrelationDiff> CorrelationDifference(const Eigen::MatrixXd& real,
                                                      const Eigen::MatrixXd& synth,
                                                      std::span<const std::string> names);

struct ColumnFidelity {
  std::string column;
  bool categorical = false;
  bool applicable = true;  // false when either side has no observed values
  double w1 = 0.0;
  double ks = 0.0;
  double ks_p = 1.0;
  std::optional<double> ks_permutation_p;
  double tvd = 0.0;
};

struct FidelityReport {
  std::vector<ColumnFidelity> columns;
  CorrelationDiff correlation;

  nlohmann::json ToJson() const;
};

struct FidelityOptions {
  bool permutation_p = false;
  int permutations = 1000;
  uint64_t seed = 0;
};

// Compares every feature column and the label. Continuous metrics use the
// observed (non-missing) values; categorical TVD includes a missing bucket
// for nullable columns.
absl::StatusOr<FidelityReport> EvaluateFidelity(const Dataset& real, const Dataset& synth,
                                                const FidelityOptions& options = {});

}  // namespace psyn

#endif  // PSYN_EVAL_FIDELITY_H_
