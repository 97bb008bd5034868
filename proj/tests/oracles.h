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


// Independent reference implementations used by the tests.

#ifndef PSYN_TESTS_ORACLES_H_
#define PSYN_TESTS_ORACLES_H_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace psyn::oracle {

// Sampled Gaussian RDP at order 2 by direct summation of the three binomial
// terms of E[(p/q)^2] under the mixture.
inline double SampledGaussianRdpOrder2(double q, double sigma) {
  const double a = (1.0 - q) * (1.0 - q) + 2.0 * q * (1.0 - q) +
                   q * q * std::exp(1.0 / (sigma * sigma));
  return std::log(a);
}

// Hamilton apportionment with remainder ties going to the lower index.
inline std::vector<int64_t> Hamilton(const std::vector<double>& weights,
                                     int64_t total) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<int64_t> counts(weights.size());
  std::vector<double> remainder(weights.size());
  int64_t assigned = 0;
  for (size_t k = 0; k < weights.size(); ++k) {
    const double quota = total * weights[k] / sum;
    counts[k] = static_cast<int64_t>(std::floor(quota));
    remainder[k] = quota - counts[k];
    assigned += counts[k];
  }
  std::vector<size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
    return a < b;
  });
  for (size_t i = 0; assigned < total; ++i, ++assigned) ++counts[order[i]];
  return counts;
}

// W1 by replicating each sample to a common size and averaging sorted gaps.
inline double WassersteinByReplication(const std::vector<double>& a,
                                       const std::vector<double>& b) {
  std::vector<double> ra;
  std::vector<double> rb;
  for (double v : a) ra.insert(ra.end(), b.size(), v);
  for (double v : b) rb.insert(rb.end(), a.size(), v);
  std::sort(ra.begin(), ra.end());
  std::sort(rb.begin(), rb.end());
  double total = 0.0;
  for (size_t i = 0; i < ra.size(); ++i) total += std::abs(ra[i] - rb[i]);
  return total / ra.size();
}

inline double EcdfAt(const std::vector<double>& sample, double x) {
  int64_t count = 0;
  for (double v : sample) count += v <= x ? 1 : 0;
  return static_cast<double>(count) / sample.size();
}

// Two-sample KS statistic by evaluating both ECDFs at every sample point.
inline double KsByEcdf(const std::vector<double>& a, const std::vector<double>& b) {
  double best = 0.0;
  for (const auto* sample : {&a, &b}) {
    for (double x : *sample) best = std::max(best, std::abs(EcdfAt(a, x) - EcdfAt(b, x)));
  }
  return best;
}

// Nearest and second-nearest Euclidean distances from each query row.
struct NearestPair {
  double first = std::numeric_limits<double>::infinity();
  double second = std::numeric_limits<double>::infinity();
};

inline std::vector<NearestPair> BruteNearest(const Eigen::MatrixXd& queries,
                                             const Eigen::MatrixXd& reference) {
  std::vector<NearestPair> out(queries.rows());
  for (int64_t i = 0; i < queries.rows(); ++i) {
    for (int64_t j = 0; j < reference.rows(); ++j) {
      double sq = 0.0;
      for (int64_t c = 0; c < queries.cols(); ++c) {
        const double d = queries(i, c) - reference(j, c);
        sq += d * d;
      }
      const double d = std::sqrt(sq);
      if (d < out[i].first) {
        out[i].second = out[i].first;
        out[i].first = d;
      } else if (d < out[i].second) {
        out[i].second = d;
      }
    }
  }
  return out;
}

// AUC as the fraction of (positive, negative) pairs ranked correctly.
inline double PairwiseAuc(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0.0;
  for (double p : pos) {
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  }
  return wins / (static_cast<double>(pos.size()) * neg.size());
}

inline double Median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace psyn::oracle

#endif  // PSYN_TESTS_ORACLES_H_
