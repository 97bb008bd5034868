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

#ifndef PSYN_PIPELINE_RUN_H_
#define PSYN_PIPELINE_RUN_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "psyn/pipeline/config.h"

namespace psyn {

inline constexpr char kPsynVersion[] = "psyn 0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitBudget = 3,
  kExitNetwork = 4,
};

// ResourceExhausted maps to the budget code, Unavailable and DeadlineExceeded
// to the network code, anything else to the data code.
int ExitCodeFor(const absl::Status& status);

// bench-data, train, generate, textgen, evaluate, report.
const std::vector<std::string>& StageNames();

// Artifact paths relative to the output directory.
namespace artifacts {
inline constexpr char kRealData[] = "data/real.csv";
inline constexpr char kSchema[] = "data/schema.json";
inline constexpr char kTrainData[] = "data/train.csv";
inline constexpr char kTestData[] = "data/test.csv";
inline constexpr char kCheckpoint[] = "model/checkpoint.psyn";
inline constexpr char kTrainReport[] = "model/train_report.json";
inline constexpr char kSynthetic[] = "synth/synthetic.csv";
inline constexpr char kGeneration[] = "synth/generation.json";
inline constexpr char kBimodal[] = "text/bimodal.csv";
inline constexpr char kReview[] = "text/review.csv";
inline constexpr char kReviewKey[] = "text/review_key.csv";
inline constexpr char kTextgen[] = "text/textgen.json";
inline constexpr char kFidelity[] = "eval/fidelity.json";
inline constexpr char kPrivacy[] = "eval/privacy.json";
inline constexpr char kUtility[] = "eval/utility.json";
inline constexpr char kReport[] = "report.md";
inline constexpr char kManifest[] = "manifest.json";
inline constexpr char kTimings[] = "timings.json";
inline constexpr char kLock[] = ".psyn.lock";
}  // namespace artifacts

// Seed for a named pipeline stream, derived from the global seed.
uint64_t DeriveSeed(uint64_t seed, std::string_view name);

// Runs one stage under the output-directory lock. On failure, files written
// by the stage are removed and the manifest is left unchanged.
absl::Status RunStage(std::string_view stage, const PipelineConfig& config);

// Runs every stage in order, stopping at the first failure.
absl::Status RunAll(const PipelineConfig& config);

}  // namespace psyn

#endif  // PSYN_PIPELINE_RUN_H_
