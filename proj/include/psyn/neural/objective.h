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

#ifndef PSYN_NEURAL_OBJECTIVE_H_
#define PSYN_NEURAL_OBJECTIVE_H_

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "psyn/common/random.h"
#include "psyn/neural/tensor_list.h"

namespace psyn {

// A differentiable model whose loss is a sum of independent per-row terms.
//
// Any randomness a row's loss needs (reparameterization draws, diffusion
// timesteps) is drawn up front into a `noise` matrix with one row per example,
// so that the loss is a deterministic function of (parameters, x, y, noise).
class Objective {
 public:
  virtual ~Objective() = default;

  virtual ParameterSet Parameters() const = 0;
  virtual absl::Status SetParameters(const ParameterSet& params) = 0;

  virtual int noise_width() const = 0;
  virtual Eigen::MatrixXd DrawNoise(int64_t rows, Rng& rng) const = 0;

  // Sum over rows of the per-row loss. When `grad` is non-null it receives
  // the gradient of that sum with respect to Parameters(). Row i of `noise`
  // belongs to row i of `x`.
  virtual absl::StatusOr<double> SumLoss(const Eigen::MatrixXd& x,
                                         std::span<const int> labels,
                                         const Eigen::MatrixXd& noise,
                                         GradientSet* grad) const = 0;
};

// Per-row gradients: entry i equals SumLoss on the single-row batch i. Row
// losses are written to `losses` when non-null. A non-finite row loss is an
// error naming the row.
absl::StatusOr<std::vector<GradientSet>> PerExampleGrads(
    const Objective& objective, const Eigen::MatrixXd& x,
    std::span<const int> labels, const Eigen::MatrixXd& noise,
    std::vector<double>* losses = nullptr);

// Visits the per-row gradients in index order without materializing them all.
template <typename Visitor>
absl::Status ForEachExampleGrad(const Objective& objective,
                                const Eigen::MatrixXd& x,
                                std::span<const int> labels,
                                const Eigen::MatrixXd& noise, Visitor&& visit);

// Central finite-difference check of SumLoss's gradient at the objective's
// current parameters. Returns the largest |analytic - numeric| /
// max(|analytic|, |numeric|, floor) over every parameter entry.
absl::StatusOr<double> MaxGradientRelativeError(Objective& objective,
                                                const Eigen::MatrixXd& x,
                                                std::span<const int> labels,
                                                const Eigen::MatrixXd& noise,
                                                double step = 1e-6,
                                                double floor = 1e-3);

// ---------------------------------------------------------------------------

absl::Status CheckRowLoss(double loss, int64_t row);

template <typename Visitor>
absl::Status ForEachExampleGrad(const Objective& objective,
                                const Eigen::MatrixXd& x,
                                std::span<const int> labels,
                                const Eigen::MatrixXd& noise, Visitor&& visit) {
  Eigen::MatrixXd x_row;
  Eigen::MatrixXd noise_row;
  for (int64_t i = 0; i < x.rows(); ++i) {
    x_row = x.row(i);
    noise_row = noise.cols() > 0 ? Eigen::MatrixXd(noise.row(i))
                                 : Eigen::MatrixXd(1, 0);
    GradientSet grad;
    absl::StatusOr<double> loss = objective.SumLoss(
        x_row, labels.subspan(static_cast<size_t>(i), 1), noise_row, &grad);
    if (!loss.ok()) return loss.status();
    absl::Status row_status = CheckRowLoss(*loss, i);
    if (!row_status.ok()) return row_status;
    visit(i, *loss, std::move(grad));
  }
  return absl::OkStatus();
}

}  // namespace psyn

#endif  // PSYN_NEURAL_OBJECTIVE_H_
