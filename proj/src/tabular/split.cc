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

#include "psyn/tabular/split.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "absl/strings/str_cat.h"
#include "psyn/common/random.h"

namespace psyn {
namespace {

int64_t TrainCount(double fraction, int64_t n) {
  const int64_t count = std::llround(fraction * static_cast<double>(n));
  return std::clamp<int64_t>(count, 1, n - 1);
}

}  // namespace

absl::StatusOr<SplitResult> SplitDataset(const Dataset& dataset,
                                         double train_fraction, uint64_t seed,
                                         bool stratified) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("train fraction must lie in (0, 1), got ", train_fraction));
  }
  if (dataset.size() < 2) {
    return absl::InvalidArgumentError("splitting needs at least 2 rows");
  }
  Rng rng = Rng::FromSeed(seed, "split");
  std::vector<char> in_train(dataset.size(), 0);
  if (stratified) {
    const Schema& schema = dataset.schema();
    std::vector<std::vector<int64_t>> by_class(schema.num_classes());
    for (int64_t r = 0; r < dataset.size(); ++r) {
      by_class[dataset.label(r)].push_back(r);
    }
    for (int k = 0; k < schema.num_classes(); ++k) {
      std::vector<int64_t>& members = by_class[k];
      if (members.empty()) continue;
      if (members.size() == 1) {
        return absl::FailedPreconditionError(absl::StrCat(
            "class '", schema.label_spec().levels[k],
            "' has a single row; stratified splitting is impossible, use a "
            "non-stratified split"));
      }
      rng.Shuffle(members);
      const int64_t take = TrainCount(train_fraction, members.size());
      for (int64_t i = 0; i < take; ++i) in_train[members[i]] = 1;
    }
  } else {
    std::vector<int64_t> order(dataset.size());
    for (int64_t r = 0; r < dataset.size(); ++r) order[r] = r;
    rng.Shuffle(order);
    const int64_t take = TrainCount(train_fraction, dataset.size());
    for (int64_t i = 0; i < take; ++i) in_train[order[i]] = 1;
  }
  std::vector<int64_t> train_rows;
  std::vector<int64_t> test_rows;
  for (int64_t r = 0; r < dataset.size(); ++r) {
    (in_train[r] ? train_rows : test_rows).push_back(r);
  }
  return SplitResult{dataset.Subset(train_rows), dataset.Subset(test_rows)};
}

}  // namespace psyn
