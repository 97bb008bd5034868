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

#include "psyn/eval/utility.h"

#include "absl/strings/str_cat.h"
#include "psyn/common/files.h"
#include "psyn/common/status_macros.h"
#include "psyn/tabular/encoder.h"

namespace psyn {

nlohmann::json UtilityReport::ToJson() const {
  nlohmann::json recall = nlohmann::json::array();
  for (const auto& d : delta_recall) {
    recall.push_back(d.has_value() ? nlohmann::json(*d) : nlohmann::json(nullptr));
  }
  return {{"trtr", trtr.ToJson()},
          {"tstr", tstr.ToJson()},
          {"delta", {{"accuracy", delta_accuracy},
                     {"macro_f1", delta_macro_f1},
                     {"per_class_recall", recall}}},
          {"classifier_config_hash", classifier_config_hash},
          {"encoder_hash", encoder_hash},
          {"warnings", warnings}};
}

absl::StatusOr<UtilityReport> TstrTrtr(const Dataset& real_train, const Dataset& real_test,
                                       const Dataset& synth_train,
                                       const ClassifierConfig& config) {
  if (synth_train.empty()) return absl::InvalidArgumentError("synthetic training set is empty");
  if (!(real_train.schema() == real_test.schema()) ||
      !(real_train.schema() == synth_train.schema())) {
    return absl::InvalidArgumentError("TSTR/TRTR datasets must share one schema");
  }
  PSYN_ASSIGN_OR_RETURN(const EncoderState encoder, FitEncoder(real_train));
  PSYN_ASSIGN_OR_RETURN(const EncodedMatrix train, Encode(real_train, encoder));
  PSYN_ASSIGN_OR_RETURN(const EncodedMatrix test, Encode(real_test, encoder));
  PSYN_ASSIGN_OR_RETURN(const EncodedMatrix synth, Encode(synth_train, encoder));
  const int k = encoder.num_classes();

  PSYN_ASSIGN_OR_RETURN(const FitEvalResult trtr, FitEvalClassifier(train, test, k, config));
  PSYN_ASSIGN_OR_RETURN(const FitEvalResult tstr, FitEvalClassifier(synth, test, k, config));

  UtilityReport report;
  report.trtr = trtr.metrics;
  report.tstr = tstr.metrics;
  report.delta_accuracy = tstr.metrics.accuracy - trtr.metrics.accuracy;
  report.delta_macro_f1 = tstr.metrics.macro_f1 - trtr.metrics.macro_f1;
  report.delta_recall.resize(k);
  for (int c = 0; c < k; ++c) {
    const auto& a = tstr.metrics.per_class_recall[c];
    const auto& b = trtr.metrics.per_class_recall[c];
    if (a.has_value() && b.has_value()) report.delta_recall[c] = *a - *b;
  }
  report.classifier_config_hash = config.Hash();
  report.encoder_hash = Sha256Hex(encoder.ToJson().dump());
  for (const std::string& w : trtr.warnings) report.warnings.push_back(absl::StrCat("TRTR: ", w));
  for (const std::string& w : tstr.warnings) report.warnings.push_back(absl::StrCat("TSTR: ", w));
  return report;
}

}  // namespace psyn
