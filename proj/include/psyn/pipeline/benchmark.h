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

#ifndef PSYN_PIPELINE_BENCHMARK_H_
#define PSYN_PIPELINE_BENCHMARK_H_

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "psyn/common/random.h"
#include "psyn/tabular/dataset.h"

namespace psyn {

// Mechanism classes of the trauma preset, in level order.
std::vector<std::string> TraumaMechanisms();
// 0.15, 0.55, 0.20, 0.075, 0.025.
std::vector<double> TraumaClassShares();

// 25 columns: the `mechanism` label plus 24 vitals, visit-context and
// demographic features, three of them nullable.
Schema TraumaSchema();

// Rows of the trauma preset. Class counts are the largest-remainder
// apportionment of `rows` over `class_shares`; a shared latent severity
// factor correlates vitals and categorical outcomes.
absl::StatusOr<Dataset> GenerateTraumaBenchmark(int64_t rows,
                                                std::span<const double> class_shares,
                                                uint64_t seed);

// Class-conditional isotropic Gaussians over two continuous columns x1, x2,
// labelled by `component`.
struct MixtureOracle {
  std::vector<std::array<double, 2>> means;
  double stddev = 1.0;
  double min = -10.0;  // declared column range
  double max = 10.0;

  static MixtureOracle Default();  // three components
  int num_classes() const { return static_cast<int>(means.size()); }
  Schema schema() const;

  // counts[y] rows of class y, in class order.
  absl::StatusOr<Dataset> Sample(std::span<const int64_t> counts, Rng& rng) const;
};

absl::StatusOr<Dataset> GenerateMixtureBenchmark(int64_t rows,
                                                 std::span<const double> class_shares,
                                                 uint64_t seed);

// Dispatches on preset name ("trauma" or "mixture"); empty shares use the
// preset default.
absl::StatusOr<Dataset> GenerateBenchmark(const std::string& preset, int64_t rows,
                                          std::span<const double> class_shares,
                                          uint64_t seed);

}  // namespace psyn

#endif  // PSYN_PIPELINE_BENCHMARK_H_
