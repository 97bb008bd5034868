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

#ifndef PSYN_TABULAR_SPLIT_H_
#define PSYN_TABULAR_SPLIT_H_

#include <cstdint>
#include <utility>

#include "absl/status/statusor.h"
#include "psyn/tabular/dataset.h"

namespace psyn {

struct SplitResult {
  Dataset train;
  Dataset test;
};

// Seeded train/test partition. When stratified, each class with n_c rows
// contributes round(train_fraction * n_c) rows to train, kept within
// [1, n_c - 1]. Both halves keep the input row order.
absl::StatusOr<SplitResult> SplitDataset(const Dataset& dataset,
                                         double train_fraction, uint64_t seed,
                                         bool stratified = true);

}  // namespace psyn

#endif  // PSYN_TABULAR_SPLIT_H_
