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

#ifndef PSYN_MODELS_GENERATOR_H_
#define PSYN_MODELS_GENERATOR_H_

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "psyn/common/random.h"
#include "psyn/neural/objective.h"
#include "psyn/tabular/encoder.h"

namespace psyn {

enum class ModelKind : uint32_t { kVae = 1, kDdpm = 2 };

std::string_view ModelKindName(ModelKind kind);
absl::StatusOr<ModelKind> ParseModelKind(std::string_view name);

// A trainable class-conditional generator over encoded rows.
class GeneratorModel : public Objective {
 public:
  virtual ModelKind kind() const = 0;
  // The encoder whose row layout the model reads and writes.
  virtual const EncoderState& layout() const = 0;
  virtual nlohmann::json Hyperparameters() const = 0;
  virtual std::unique_ptr<GeneratorModel> Clone() const = 0;

  // Draws n rows of class `label`. Output satisfies the encoded-domain
  // invariants (exact one-hot blocks, continuous slots in [-1, 1]). Clamped
  // continuous values are counted into `clamped` (per schema column) when
  // given.
  virtual absl::StatusOr<Eigen::MatrixXd> Sample(
      int label, int64_t n, Rng& rng,
      std::vector<int64_t>* clamped = nullptr) const = 0;

  int num_classes() const { return layout().num_classes(); }
  int width() const { return layout().width(); }

  // "<kind>-<first 16 hex digits of the parameter digest>".
  std::string ModelId() const;
};

// Builds a freshly initialized model from its kind and hyperparameters.
absl::StatusOr<std::unique_ptr<GeneratorModel>> CreateGenerator(
    ModelKind kind, const nlohmann::json& hyperparameters,
    const EncoderState& layout, uint64_t init_seed);

// [x | one_hot(labels)] with num_classes label columns.
Eigen::MatrixXd AppendOneHot(const Eigen::MatrixXd& x, std::span<const int> labels,
                             int num_classes);

}  // namespace psyn

#endif  // PSYN_MODELS_GENERATOR_H_
