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

#ifndef PSYN_TEXT_GENERATION_H_
#define PSYN_TEXT_GENERATION_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "psyn/tabular/csv.h"
#include "psyn/tabular/dataset.h"
#include "psyn/text/prompt.h"

namespace psyn {

// Environment variable holding the bearer token for the completion endpoint.
inline constexpr char kApiTokenEnv[] = "PSYN_API_TOKEN";

struct GenerationClientConfig {
  std::string endpoint;  // empty means no remote service
  std::string model = "medgemma-27b";
  double temperature = 0.7;
  int max_tokens = 256;
  double timeout_seconds = 30.0;
  int retries = 2;
  bool offline_fallback = true;
  int max_in_flight = 4;

  absl::Status Validate() const;
  nlohmann::json ToJson() const;
  static absl::StatusOr<GenerationClientConfig> FromJson(const nlohmann::json& json);
};

// Sends one JSON request body and returns the response body. Connection
// failures and non-2xx responses are errors.
class CompletionTransport {
 public:
  virtual ~CompletionTransport() = default;
  virtual absl::StatusOr<std::string> Post(const std::string& body) = 0;
};

// HTTP(S) POST to `config.endpoint`.
std::unique_ptr<CompletionTransport> MakeHttpTransport(const GenerationClientConfig& config);

// {"model", "prompt", "temperature", "max_tokens"}.
nlohmann::json CompletionRequest(const GenerationClientConfig& config,
                                 const std::string& prompt);
// Reads "text", or choices[0].text. An empty completion is an error.
absl::StatusOr<std::string> ParseCompletion(const std::string& body);

enum class NoteSource { kRemote, kFallback };
std::string_view NoteSourceName(NoteSource source);

struct ClinicalNote {
  std::string text;
  NoteSource source = NoteSource::kFallback;
  std::string template_id;
  uint64_t seed = 0;
  int retries = 0;  // failed attempts before the final one

  friend bool operator==(const ClinicalNote&, const ClinicalNote&) = default;
};

// Remote generation with up to 1 + config.retries attempts. Without an
// endpoint, or after exhausting retries, `fallback` is used only when
// config.offline_fallback is set.
absl::StatusOr<ClinicalNote> GenerateNote(const GenerationClientConfig& config,
                                          CompletionTransport* transport,
                                          const std::string& prompt,
                                          const std::string& template_id, uint64_t seed,
                                          const std::function<std::string()>& fallback);

struct TextGenOptions {
  PromptTemplate prompt_template;
  bool include_label = true;
  uint64_t seed = 0;
};

// One note per record, in record order. Records must be synthetic. Remote
// calls run on up to config.max_in_flight threads.
absl::StatusOr<std::vector<ClinicalNote>> GenerateNotes(
    const Dataset& records, const GenerationClientConfig& config,
    CompletionTransport* transport, const TextGenOptions& options);

// Positional (record, note) pairs.
struct BimodalDataset {
  Dataset records;
  std::vector<ClinicalNote> notes;

  int64_t size() const { return records.size(); }
  // Record columns followed by note, note_source, template_id, note_seed.
  CsvTable ToTable() const;
};

struct ReviewExport {
  CsvTable review;  // review_id, note, record columns, judgment
  CsvTable key;     // review_id, row
};

struct PairResult {
  BimodalDataset pairs;
  ReviewExport review;
};

absl::StatusOr<PairResult> PairAndExport(const Dataset& records,
                                         std::vector<ClinicalNote> notes,
                                         int64_t k_review, uint64_t seed);

}  // namespace psyn

#endif  // PSYN_TEXT_GENERATION_H_
