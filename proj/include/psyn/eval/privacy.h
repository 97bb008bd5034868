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

#ifndef PSYN_EVAL_PRIVACY_H_
#define PSYN_EVAL_PRIVACY_H_

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"

namespace psyn {

// Distances are Euclidean in encoded space.

struct DistanceQuantiles {
  double min = 0.0;
  double p05 = 0.0;
  double median = 0.0;

  nlohmann::json ToJson() const;
};

// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
double Quantile(std::vector<double> values, double q);
DistanceQuantiles SummarizeDistances(const std::vector<double>& values);

struct PrivacyDistances {
  std::vector<double> dcr;   // per synthetic row
  std::vector<double> nndr;  // per synthetic row; empty with fewer than 2 real rows
  DistanceQuantiles dcr_quantiles;
  std::optional<DistanceQuantiles> nndr_quantiles;
  int64_t duplicates = 0;  // synthetic rows with DCR < 1e-12
};

inline constexpr double kDuplicateDistance = 1e-12;

// Brute-force nearest and second-nearest real row for each synthetic row.
absl::StatusOr<PrivacyDistances> ComputePrivacyDistances(const Eigen::MatrixXd& synth,
                                                         const Eigen::MatrixXd& real);

// Mann-Whitney AUC of positive versus negative scores with midranks for ties.
absl::StatusOr<double> RankAuc(std::span<const double> positives,
                               std::span<const double> negatives);

// Distance-based membership inference: score = -(distance to the nearest
// synthetic row), members are positives.
absl::StatusOr<double> MembershipAuc(const Eigen::MatrixXd& members,
                                     const Eigen::MatrixXd& holdout,
                                     const Eigen::MatrixXd& synth);

struct PrivacyReport {
  PrivacyDistances distances;
  std::optional<double> membership_auc;

  nlohmann::json ToJson() const;
};

}  // namespace psyn

#endif  // PSYN_EVAL_PRIVACY_H_
