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

#include "psyn/neural/objective.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "psyn/common/status_macros.h"

namespace psyn {

absl::Status CheckRowLoss(double loss, int64_t row) {
  if (!std::isfinite(loss)) {
    return absl::InvalidArgumentError(
        absl::StrCat("non-finite loss for row ", row));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<GradientSet>> PerExampleGrads(
    const Objective& objective, const Eigen::MatrixXd& x,
    std::span<const int> labels, const Eigen::MatrixXd& noise,
    std::vector<double>* losses) {
  if (x.rows() == 0) return absl::InvalidArgumentError("empty batch");
  std::vector<GradientSet> grads;
  grads.reserve(x.rows());
  if (losses != nullptr) losses->clear();
  PSYN_RETURN_IF_ERROR(ForEachExampleGrad(
      objective, x, labels, noise,
      [&](int64_t, double loss, GradientSet grad) {
        grads.push_back(std::move(grad));
        if (losses != nullptr) losses->push_back(loss);
      }));
  return grads;
}

absl::StatusOr<double> MaxGradientRelativeError(Objective& objective,
                                                const Eigen::MatrixXd& x,
                                                std::span<const int> labels,
                                                const Eigen::MatrixXd& noise,
                                                double step, double floor) {
  const ParameterSet original = objective.Parameters();
  GradientSet analytic;
  PSYN_RETURN_IF_ERROR(objective.SumLoss(x, labels, noise, &analytic).status());
  const std::vector<double> analytic_flat = analytic.Flatten();
  std::vector<double> flat = original.Flatten();

  ParameterSet probe = original;
  double worst = 0.0;
  absl::Status status = absl::OkStatus();
  for (size_t i = 0; i < flat.size() && status.ok(); ++i) {
    const double saved = flat[i];
    flat[i] = saved + step;
    status = probe.AssignFlat(flat);
    if (status.ok()) status = objective.SetParameters(probe);
    absl::StatusOr<double> plus = objective.SumLoss(x, labels, noise, nullptr);
    flat[i] = saved - step;
    if (status.ok()) status = probe.AssignFlat(flat);
    if (status.ok()) status = objective.SetParameters(probe);
    absl::StatusOr<double> minus = objective.SumLoss(x, labels, noise, nullptr);
    flat[i] = saved;
    if (status.ok() && !plus.ok()) status = plus.status();
    if (status.ok() && !minus.ok()) status = minus.status();
    if (!status.ok()) break;
    const double numeric = (*plus - *minus) / (2.0 * step);
    const double scale =
        std::max({std::abs(analytic_flat[i]), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(analytic_flat[i] - numeric) / scale);
  }
  PSYN_RETURN_IF_ERROR(objective.SetParameters(original));
  PSYN_RETURN_IF_ERROR(status);
  return worst;
}

}  // namespace psyn
