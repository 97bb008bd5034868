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

#include "psyn/eval/fidelity.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "absl/strings/str_cat.h"
#include "psyn/common/random.h"
#include "psyn/common/status_macros.h"

namespace psyn {
namespace {

absl::Status CheckSamples(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return absl::InvalidArgumentError("empty sample");
  for (double v : a) {
    if (!std::isfinite(v)) return absl::InvalidArgumentError("sample has a non-finite value");
  }
  for (double v : b) {
    if (!std::isfinite(v)) return absl::InvalidArgumentError("sample has a non-finite value");
  }
  return absl::OkStatus();
}

std::vector<double> Sorted(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  std::sort(out.begin(), out.end());
  return out;
}

double SortedKsStatistic(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  size_t i = 0;
  size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

struct PairMoments {
  double correlation = 0.0;
  bool constant = false;
};

PairMoments Pearson(const Eigen::MatrixXd& data, int a, int b) {
  double n = 0.0, sa = 0.0, sb = 0.0;
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    const double x = data(r, a), y = data(r, b);
    if (std::isnan(x) || std::isnan(y)) continue;
    n += 1.0;
    sa += x;
    sb += y;
  }
  if (n < 2.0) return {0.0, true};
  const double ma = sa / n, mb = sb / n;
  double cab = 0.0, caa = 0.0, cbb = 0.0;
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    const double x = data(r, a), y = data(r, b);
    if (std::isnan(x) || std::isnan(y)) continue;
    cab += (x - ma) * (y - mb);
    caa += (x - ma) * (x - ma);
    cbb += (y - mb) * (y - mb);
  }
  if (caa <= 0.0 || cbb <= 0.0) return {0.0, true};
  return {std::clamp(cab / std::sqrt(caa * cbb), -1.0, 1.0), false};
}

}  // namespace

absl::StatusOr<double> Wasserstein1(std::span<const double> a, std::span<const double> b) {
  PSYN_RETURN_IF_ERROR(CheckSamples(a, b));
  const std::vector<double> sa = Sorted(a);
  const std::vector<double> sb = Sorted(b);
  if (sa.size() == sb.size()) {
    double total = 0.0;
    for (size_t i = 0; i < sa.size(); ++i) total += std::abs(sa[i] - sb[i]);
    return total / static_cast<double>(sa.size());
  }
  std::vector<double> grid;
  grid.reserve(sa.size() + sb.size());
  std::merge(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(grid));
  const double n = static_cast<double>(sa.size());
  const double m = static_cast<double>(sb.size());
  size_t i = 0;
  size_t j = 0;
  double total = 0.0;
  for (size_t k = 0; k + 1 < grid.size(); ++k) {
    while (i < sa.size() && sa[i] <= grid[k]) ++i;
    while (j < sb.size() && sb[j] <= grid[k]) ++j;
    total += std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m) *
             (grid[k + 1] - grid[k]);
  }
  return total;
}

double KolmogorovSurvival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  constexpr int kTerms = 100;
  if (lambda < 1.18) {
    // Dual series, accurate for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k <= kTerms; ++k) {
      const double odd = 2.0 * k - 1.0;
      cdf += std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double survival = 0.0;
  for (int k = 1; k <= kTerms; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    survival += (k % 2 == 1 ? 2.0 : -2.0) * term;
  }
  return std::clamp(survival, 0.0, 1.0);
}

absl::StatusOr<KsResult> KolmogorovSmirnov(std::span<const double> a,
                                           std::span<const double> b) {
  PSYN_RETURN_IF_ERROR(CheckSamples(a, b));
  KsResult result;
  result.statistic = SortedKsStatistic(Sorted(a), Sorted(b));
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  result.p_value = KolmogorovSurvival(result.statistic * std::sqrt(n * m / (n + m)));
  return result;
}

absl::StatusOr<double> KsPermutationPValue(std::span<const double> a,
                                           std::span<const double> b, int permutations,
                                           uint64_t seed) {
  PSYN_RETURN_IF_ERROR(CheckSamples(a, b));
  if (permutations < 1) return absl::InvalidArgumentError("permutations must be >= 1");
  const double observed = SortedKsStatistic(Sorted(a), Sorted(b));
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  Rng rng = Rng::FromSeed(seed, "ks-permutation");
  int64_t at_least = 0;
  std::vector<double> left, right;
  for (int p = 0; p < permutations; ++p) {
    rng.Shuffle(pooled);
    left.assign(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(a.size()));
    right.assign(pooled.begin() + static_cast<std::ptrdiff_t>(a.size()), pooled.end());
    std::sort(left.begin(), left.end());
    std::sort(right.begin(), right.end());
    if (SortedKsStatistic(left, right) >= observed - 1e-12) ++at_least;
  }
  return static_cast<double>(at_least + 1) / static_cast<double>(permutations + 1);
}

absl::StatusOr<double> TotalVariation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size() || p.empty()) {
    return absl::InvalidArgumentError("frequency vectors must be non-empty and equal length");
  }
  double sp = 0.0, sq = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0) || !(q[i] >= 0.0)) {
      return absl::InvalidArgumentError("frequencies must be non-negative");
    }
    sp += p[i];
    sq += q[i];
  }
  if (!(sp > 0.0) || !(sq > 0.0)) return absl::InvalidArgumentError("empty sample");
  double total = 0.0;
  for (size_t i = 0; i < p.size(); ++i) total += std::abs(p[i] / sp - q[i] / sq);
  return std::min(0.5 * total, 1.0);
}

absl::StatusOr<CorrelationDiff> CorrelationDifference(const Eigen::MatrixXd& real,
                                                      const Eigen::MatrixXd& synth,
                                                      std::span<const std::string> names) {
  if (real.cols() != synth.cols() || static_cast<Eigen::Index>(names.size()) != real.cols()) {
    return absl::InvalidArgumentError("correlation inputs have mismatched columns");
  }
  CorrelationDiff result;
  if (real.cols() < 2 || real.rows() < 2 || synth.rows() < 2) return result;
  result.applicable = true;
  std::vector<bool> flagged(real.cols(), false);
  for (int a = 0; a < real.cols(); ++a) {
    for (int b = a + 1; b < real.cols(); ++b) {
      const PairMoments r = Pearson(real, a, b);
      const PairMoments s = Pearson(synth, a, b);
      if (r.constant || s.constant) {
        for (int c : {a, b}) {
          const PairMoments rc = Pearson(real, c, c);
          const PairMoments sc = Pearson(synth, c, c);
          if (rc.constant || sc.constant) flagged[c] = true;
        }
      }
      result.max_abs_diff =
          std::max(result.max_abs_diff, std::abs(r.correlation - s.correlation));
    }
  }
  for (int c = 0; c < real.cols(); ++c) {
    if (flagged[c]) result.constant_columns.push_back(names[c]);
  }
  return result;
}

nlohmann::json FidelityReport::ToJson() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const ColumnFidelity& c : columns) {
    nlohmann::json entry = {{"column", c.column},
                            {"kind", c.categorical ? "categorical" : "continuous"},
                            {"applicable", c.applicable}};
    if (c.applicable && c.categorical) {
      entry["tvd"] = c.tvd;
    } else if (c.applicable) {
      entry["w1"] = c.w1;
      entry["ks_d"] = c.ks;
      entry["ks_p"] = c.ks_p;
      if (c.ks_permutation_p.has_value()) entry["ks_permutation_p"] = *c.ks_permutation_p;
    }
    cols.push_back(std::move(entry));
  }
  nlohmann::json corr = {{"applicable", correlation.applicable}};
  if (correlation.applicable) {
    corr["max_abs_diff"] = correlation.max_abs_diff;
    corr["constant_columns"] = correlation.constant_columns;
  }
  return {{"columns", cols}, {"correlation", corr}};
}

absl::StatusOr<FidelityReport> EvaluateFidelity(const Dataset& real, const Dataset& synth,
                                                const FidelityOptions& options) {
  if (!(real.schema() == synth.schema())) {
    return absl::InvalidArgumentError("real and synthetic datasets have different schemas");
  }
  if (real.empty() || synth.empty()) return absl::InvalidArgumentError("empty sample");
  const Schema& schema = real.schema();
  FidelityReport report;
  std::vector<int> continuous;
  for (int c = 0; c < schema.num_columns(); ++c) {
    const ColumnSpec& spec = schema.column(c);
    ColumnFidelity entry;
    entry.column = spec.name;
    entry.categorical = spec.is_categorical();
    if (spec.is_categorical()) {
      const size_t buckets = spec.levels.size() + (spec.nullable ? 1 : 0);
      std::vector<double> p(buckets, 0.0), q(buckets, 0.0);
      for (const Record& r : real.rows()) {
        ++p[r[c].is_missing() ? spec.levels.size() : static_cast<size_t>(r[c].level())];
      }
      for (const Record& r : synth.rows()) {
        ++q[r[c].is_missing() ? spec.levels.size() : static_cast<size_t>(r[c].level())];
      }
      PSYN_ASSIGN_OR_RETURN(entry.tvd, TotalVariation(p, q));
    } else {
      continuous.push_back(c);
      std::vector<double> a, b;
      for (const Record& r : real.rows()) {
        if (!r[c].is_missing()) a.push_back(r[c].real());
      }
      for (const Record& r : synth.rows()) {
        if (!r[c].is_missing()) b.push_back(r[c].real());
      }
      if (a.empty() || b.empty()) {
        entry.applicable = false;
      } else {
        PSYN_ASSIGN_OR_RETURN(entry.w1, Wasserstein1(a, b));
        PSYN_ASSIGN_OR_RETURN(const KsResult ks, KolmogorovSmirnov(a, b));
        entry.ks = ks.statistic;
        entry.ks_p = ks.p_value;
        if (options.permutation_p) {
          PSYN_ASSIGN_OR_RETURN(
              entry.ks_permutation_p,
              KsPermutationPValue(a, b, options.permutations,
                                  Rng::HashName(spec.name) ^ options.seed));
        }
      }
    }
    report.columns.push_back(std::move(entry));
  }

  auto continuous_matrix = [&](const Dataset& d) {
    Eigen::MatrixXd m(d.size(), static_cast<Eigen::Index>(continuous.size()));
    for (int64_t r = 0; r < d.size(); ++r) {
      for (size_t j = 0; j < continuous.size(); ++j) {
        const Value& v = d.row(r)[continuous[j]];
        m(r, static_cast<Eigen::Index>(j)) =
            v.is_missing() ? std::numeric_limits<double>::quiet_NaN() : v.real();
      }
    }
    return m;
  };
  std::vector<std::string> names;
  for (int c : continuous) names.push_back(schema.column(c).name);
  PSYN_ASSIGN_OR_RETURN(report.correlation,
                        CorrelationDifference(continuous_matrix(real),
                                              continuous_matrix(synth), names));
  return report;
}

}  // namespace psyn
