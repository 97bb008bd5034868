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

#include "psyn/eval/privacy.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "psyn/common/status_macros.h"

namespace psyn {
namespace {

absl::Status CheckWidths(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) {
    return absl::InvalidArgumentError(
        absl::StrCat("width mismatch: ", a.cols(), " vs ", b.cols()));
  }
  return absl::OkStatus();
}

// Squared distances from each row of `queries` to the two closest rows of
// `reference`.
void TwoNearest(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& reference,
                std::vector<double>* first, std::vector<double>* second) {
  const double inf = std::numeric_limits<double>::infinity();
  first->assign(queries.rows(), inf);
  second->assign(queries.rows(), inf);
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    double best = inf, next = inf;
    for (Eigen::Index j = 0; j < reference.rows(); ++j) {
      const double d = (queries.row(i) - reference.row(j)).squaredNorm();
      if (d < best) {
        next = best;
        best = d;
      } else if (d < next) {
        next = d;
      }
    }
    (*first)[i] = best;
    (*second)[i] = next;
  }
}

}  // namespace

nlohmann::json DistanceQuantiles::ToJson() const {
  return {{"min", min}, {"p05", p05}, {"median", median}};
}

double Quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

DistanceQuantiles SummarizeDistances(const std::vector<double>& values) {
  return {Quantile(values, 0.0), Quantile(values, 0.05), Quantile(values, 0.5)};
}

absl::StatusOr<PrivacyDistances> ComputePrivacyDistances(const Eigen::MatrixXd& synth,
                                                         const Eigen::MatrixXd& real) {
  PSYN_RETURN_IF_ERROR(CheckWidths(synth, real));
  if (synth.rows() == 0 || real.rows() == 0) {
    return absl::InvalidArgumentError("privacy distances need non-empty inputs");
  }
  std::vector<double> first, second;
  TwoNearest(synth, real, &first, &second);
  PrivacyDistances out;
  out.dcr.resize(first.size());
  for (size_t i = 0; i < first.size(); ++i) {
    out.dcr[i] = std::sqrt(first[i]);
    if (out.dcr[i] < kDuplicateDistance) ++out.duplicates;
  }
  out.dcr_quantiles = SummarizeDistances(out.dcr);
  if (real.rows() >= 2) {
    out.nndr.resize(first.size());
    for (size_t i = 0; i < first.size(); ++i) {
      const double s = std::sqrt(second[i]);
      out.nndr[i] = s > 0.0 ? out.dcr[i] / s : 1.0;
    }
    out.nndr_quantiles = SummarizeDistances(out.nndr);
  }
  return out;
}

absl::StatusOr<double> RankAuc(std::span<const double> positives,
                               std::span<const double> negatives) {
  if (positives.empty() || negatives.empty()) {
    return absl::InvalidArgumentError("AUC needs positive and negative scores");
  }
  const size_t n = positives.size() + negatives.size();
  std::vector<std::pair<double, bool>> scored;
  scored.reserve(n);
  for (double s : positives) scored.emplace_back(s, true);
  for (double s : negatives) scored.emplace_back(s, false);
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double positive_rank_sum = 0.0;
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && scored[j].first == scored[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (size_t k = i; k < j; ++k) {
      if (scored[k].second) positive_rank_sum += midrank;
    }
    i = j;
  }
  const double np = static_cast<double>(positives.size());
  const double nn = static_cast<double>(negatives.size());
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

absl::StatusOr<double> MembershipAuc(const Eigen::MatrixXd& members,
                                     const Eigen::MatrixXd& holdout,
                                     const Eigen::MatrixXd& synth) {
  PSYN_RETURN_IF_ERROR(CheckWidths(members, synth));
  PSYN_RETURN_IF_ERROR(CheckWidths(holdout, synth));
  if (members.rows() == 0 || holdout.rows() == 0 || synth.rows() == 0) {
    return absl::InvalidArgumentError("membership inference needs non-empty inputs");
  }
  std::vector<double> first, second;
  TwoNearest(members, synth, &first, &second);
  std::vector<double> member_scores(first.size());
  for (size_t i = 0; i < first.size(); ++i) member_scores[i] = -std::sqrt(first[i]);
  TwoNearest(holdout, synth, &first, &second);
  std::vector<double> holdout_scores(first.size());
  for (size_t i = 0; i < first.size(); ++i) holdout_scores[i] = -std::sqrt(first[i]);
  return RankAuc(member_scores, holdout_scores);
}

nlohmann::json PrivacyReport::ToJson() const {
  nlohmann::json out = {
      {"metric_space", "encoded"},
      {"dcr", distances.dcr_quantiles.ToJson()},
      {"duplicates", distances.duplicates},
      {"nndr", distances.nndr_quantiles.has_value()
                   ? distances.nndr_quantiles->ToJson()
                   : nlohmann::json("not applicable: fewer than 2 real rows")},
  };
  out["membership_auc"] = membership_auc.has_value() ? nlohmann::json(*membership_auc)
                                                     : nlohmann::json(nullptr);
  return out;
}

}  // namespace psyn
