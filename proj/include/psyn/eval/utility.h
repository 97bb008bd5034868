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

#ifndef PSYN_EVAL_UTILITY_H_
#define PSYN_EVAL_UTILITY_H_

#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "psyn/eval/classifier.h"
#include "psyn/tabular/dataset.h"

namespace psyn {

struct UtilityReport {
  ClassificationMetrics trtr;
  ClassificationMetrics tstr;
  double delta_accuracy = 0.0;  // TSTR - TRTR
  double delta_macro_f1 = 0.0;
  std::vector<std::optional<double>> delta_recall;
  std::string classifier_config_hash;
  std::string encoder_hash;  // hash of the encoder shared by both arms
  std::vector<std::string> warnings;

  nlohmann::json ToJson() const;
};

// Fits the encoder on real_train only and uses it for all three datasets.
// Both arms share the classifier config and the real test set.
absl::StatusOr<UtilityReport> TstrTrtr(const Dataset& real_train, const Dataset& real_test,
                                       const Dataset& synth_train,
                                       const ClassifierConfig& config);

}  // namespace psyn

#endif  // PSYN_EVAL_UTILITY_H_
