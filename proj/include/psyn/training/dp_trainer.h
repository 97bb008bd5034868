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

#ifndef PSYN_TRAINING_DP_TRAINER_H_
#define PSYN_TRAINING_DP_TRAINER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "psyn/common/random.h"
#include "psyn/neural/objective.h"
#include "psyn/neural/optimizer.h"
#include "psyn/privacy/rdp_accountant.h"
#include "psyn/tabular/encoder.h"

namespace psyn {

// DP-SGD run description. The sampling rate q is derived from the data size
// as expected_batch_size / n; dp.sampling_rate is ignored on input and filled
// in by TrainLoop.
struct TrainConfig {
  DpConfig dp;
  bool dp_enabled = true;
  int64_t max_steps = 3000;
  std::optional<int> epochs;
  int expected_batch_size = 256;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  uint64_t seed = 0;

  absl::Status Validate(int64_t num_rows) const;
  nlohmann::json ToJson() const;
};

struct TrainReport {
  int64_t steps = 0;
  std::vector<double> loss_trace;  // mean row loss of each step's batch
  double sampling_rate = 0.0;
  double noise_multiplier = 0.0;
  double clip_norm = 0.0;
  bool dp_enabled = false;
  EpsilonDelta spent;  // epsilon 0 when no private step ran
  AccountantState accountant;
  std::string abort_reason;  // "", "budget", or an error message

  nlohmann::json ToJson() const;
};

// The independent substreams of one training run.
struct TrainStreams {
  Rng batch;  // Poisson sampling
  Rng noise;  // Gaussian gradient noise
  Rng model;  // per-row model randomness (Objective::DrawNoise)

  static TrainStreams FromSeed(uint64_t seed);
};

// Each index in [0, n) included independently with probability q.
std::vector<int64_t> PoissonSample(int64_t n, double q, Rng& rng);

// g * min(1, C / ||g||) over the flat concatenation; C = +inf leaves g as is.
GradientSet ClipGradient(const GradientSet& grad, double clip_norm);

// Streaming form of ClipAndAggregate: clipped gradients are summed in the
// order they are added.
class ClippedSum {
 public:
  ClippedSum(const GradientSet& shape, double clip_norm);

  absl::Status Add(const GradientSet& grad);
  // (sum + N(0, sigma^2 C^2) per coordinate) / expected_batch_size.
  GradientSet Finish(double noise_multiplier, double expected_batch_size,
                     Rng& rng) &&;
  int64_t count() const { return count_; }

 private:
  GradientSet sum_;
  double clip_norm_;
  int64_t count_ = 0;
};

// Clips each per-example gradient to norm C, sums in index order, adds
// Gaussian noise of std sigma * C per coordinate and divides by the expected
// batch size. `shape` gives the tensor shapes for an empty list.
absl::StatusOr<GradientSet> ClipAndAggregate(std::span<const GradientSet> per_example,
                                             const GradientSet& shape,
                                             double clip_norm,
                                             double noise_multiplier,
                                             double expected_batch_size, Rng& rng);

struct StepResult {
  double loss = 0.0;  // mean row loss over the realized batch (0 if empty)
  int64_t batch_size = 0;
};

// One step: Poisson sample, per-example gradients, clip and noise, optimizer
// update. The accountant advances by exactly one step whatever the realized
// batch size. With dp_enabled = false the step is an ordinary minibatch step
// on the mean gradient and the accountant is left alone.
//
// Fails with kResourceExhausted, leaving everything untouched, when the step
// would take the accountant past config.dp.epsilon_budget.
absl::StatusOr<StepResult> DpTrainStep(Objective& model, const EncodedMatrix& data,
                                       const TrainConfig& config,
                                       OptimizerState& optimizer,
                                       AccountantState& accountant,
                                       TrainStreams& streams);

// Runs until max_steps, the epoch limit, or budget exhaustion.
absl::StatusOr<TrainReport> TrainLoop(Objective& model, const EncodedMatrix& data,
                                      TrainConfig config);

// Number of steps TrainLoop will attempt before any budget check.
int64_t PlannedSteps(const TrainConfig& config, int64_t num_rows);

}  // namespace psyn

#endif  // PSYN_TRAINING_DP_TRAINER_H_
