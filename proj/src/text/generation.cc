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

#include "psyn/text/generation.h"

#include <atomic>
#include <cstdlib>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "absl/strings/str_cat.h"
#include "psyn/common/files.h"
#include "psyn/common/random.h"
#include "psyn/common/status_macros.h"

namespace psyn {
namespace {

class HttpTransport final : public CompletionTransport {
 public:
  explicit HttpTransport(GenerationClientConfig config) : config_(std::move(config)) {}

  absl::StatusOr<std::string> Post(const std::string& body) override {
    const size_t scheme_end = config_.endpoint.find("://");
    if (scheme_end == std::string::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("endpoint '", config_.endpoint, "' lacks a scheme"));
    }
    const size_t path_start = config_.endpoint.find('/', scheme_end + 3);
    const std::string origin = config_.endpoint.substr(0, path_start);
    const std::string path =
        path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);

    httplib::Client client(origin);
    const auto seconds = static_cast<time_t>(config_.timeout_seconds);
    const auto micros =
        static_cast<time_t>((config_.timeout_seconds - static_cast<double>(seconds)) * 1e6);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);
    httplib::Headers headers;
    if (const char* token = std::getenv(kApiTokenEnv); token != nullptr && *token != '\0') {
      headers.emplace("Authorization", absl::StrCat("Bearer ", token));
    }
    auto response = client.Post(path, headers, body, "application/json");
    if (!response) {
      return absl::UnavailableError(absl::StrCat("request to ", origin, " failed: ",
                                                 httplib::to_string(response.error())));
    }
    if (response->status < 200 || response->status >= 300) {
      return absl::UnavailableError(
          absl::StrCat("endpoint returned HTTP ", response->status));
    }
    return response->body;
  }

 private:
  GenerationClientConfig config_;
};

}  // namespace

absl::Status GenerationClientConfig::Validate() const {
  if (!(temperature >= 0.0)) return absl::InvalidArgumentError("temperature must be >= 0");
  if (!(timeout_seconds > 0.0)) return absl::InvalidArgumentError("timeout must be > 0");
  if (retries < 0) return absl::InvalidArgumentError("retries must be >= 0");
  if (max_tokens < 1) return absl::InvalidArgumentError("max_tokens must be >= 1");
  if (max_in_flight < 1) return absl::InvalidArgumentError("max_in_flight must be >= 1");
  return absl::OkStatus();
}

nlohmann::json GenerationClientConfig::ToJson() const {
  return {{"endpoint", endpoint},
          {"model", model},
          {"temperature", temperature},
          {"max_tokens", max_tokens},
          {"timeout_seconds", timeout_seconds},
          {"retries", retries},
          {"offline_fallback", offline_fallback},
          {"max_in_flight", max_in_flight}};
}

absl::StatusOr<GenerationClientConfig> GenerationClientConfig::FromJson(
    const nlohmann::json& json) {
  GenerationClientConfig config;
  try {
    for (const auto& [key, value] : json.items()) {
      if (key == "endpoint") {
        config.endpoint = value.get<std::string>();
      } else if (key == "model") {
        config.model = value.get<std::string>();
      } else if (key == "temperature") {
        config.temperature = value.get<double>();
      } else if (key == "max_tokens") {
        config.max_tokens = value.get<int>();
      } else if (key == "timeout_seconds") {
        config.timeout_seconds = value.get<double>();
      } else if (key == "retries") {
        config.retries = value.get<int>();
      } else if (key == "offline_fallback") {
        config.offline_fallback = value.get<bool>();
      } else if (key == "max_in_flight") {
        config.max_in_flight = value.get<int>();
      } else {
        return absl::InvalidArgumentError(absl::StrCat("unknown client key '", key, "'"));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("invalid client config: ", e.what()));
  }
  PSYN_RETURN_IF_ERROR(config.Validate());
  return config;
}

std::unique_ptr<CompletionTransport> MakeHttpTransport(const GenerationClientConfig& config) {
  return std::make_unique<HttpTransport>(config);
}

nlohmann::json CompletionRequest(const GenerationClientConfig& config,
                                 const std::string& prompt) {
  return {{"model", config.model},
          {"prompt", prompt},
          {"temperature", config.temperature},
          {"max_tokens", config.max_tokens}};
}

absl::StatusOr<std::string> ParseCompletion(const std::string& body) {
  nlohmann::json json = nlohmann::json::parse(body, nullptr, false);
  if (json.is_discarded() || !json.is_object()) {
    return absl::DataLossError("completion response is not a JSON object");
  }
  std::string text;
  if (json.contains("text") && json["text"].is_string()) {
    text = json["text"].get<std::string>();
  } else if (json.contains("choices") && json["choices"].is_array() &&
             !json["choices"].empty() && json["choices"][0].contains("text") &&
             json["choices"][0]["text"].is_string()) {
    text = json["choices"][0]["text"].get<std::string>();
  } else {
    return absl::DataLossError("completion response has no text field");
  }
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    return absl::DataLossError("empty completion");
  }
  return text;
}

std::string_view NoteSourceName(NoteSource source) {
  return source == NoteSource::kRemote ? "remote" : "fallback";
}

absl::StatusOr<ClinicalNote> GenerateNote(const GenerationClientConfig& config,
                                          CompletionTransport* transport,
                                          const std::string& prompt,
                                          const std::string& template_id, uint64_t seed,
                                          const std::function<std::string()>& fallback) {
  if (prompt.empty()) return absl::InvalidArgumentError("prompt is empty");
  ClinicalNote note;
  note.template_id = template_id;
  note.seed = seed;
  if (config.endpoint.empty() || transport == nullptr) {
    if (!config.offline_fallback) {
      return absl::FailedPreconditionError(
          "no completion endpoint configured and offline fallback is disabled");
    }
    note.text = fallback();
    note.source = NoteSource::kFallback;
    return note;
  }

  const std::string body = CompletionRequest(config, prompt).dump();
  absl::Status last_error;
  for (int attempt = 0; attempt <= config.retries; ++attempt) {
    absl::StatusOr<std::string> response = transport->Post(body);
    if (response.ok()) {
      PSYN_ASSIGN_OR_RETURN(note.text, ParseCompletion(*response));
      note.source = NoteSource::kRemote;
      note.retries = attempt;
      return note;
    }
    last_error = response.status();
  }
  if (config.offline_fallback) {
    note.text = fallback();
    note.source = NoteSource::kFallback;
    note.retries = config.retries + 1;
    return note;
  }
  return absl::UnavailableError(absl::StrCat("network failure after ", config.retries + 1,
                                             " attempts: ", last_error.message()));
}

absl::StatusOr<std::vector<ClinicalNote>> GenerateNotes(
    const Dataset& records, const GenerationClientConfig& config,
    CompletionTransport* transport, const TextGenOptions& options) {
  if (records.provenance() != Provenance::kSynthetic) {
    return absl::FailedPreconditionError(
        "text generation accepts synthetic records only; got real data");
  }
  PSYN_RETURN_IF_ERROR(config.Validate());
  const Schema& schema = records.schema();
  PSYN_RETURN_IF_ERROR(options.prompt_template.Validate(schema));

  const int64_t n = records.size();
  const Rng root = Rng::FromSeed(options.seed, "textgen");
  std::vector<absl::StatusOr<ClinicalNote>> results(n, absl::UnknownError("not run"));
  auto generate_one = [&](int64_t i) {
    const Record& record = records.row(i);
    const uint64_t note_seed = root.Fork(static_cast<uint64_t>(i)).NextU64();
    absl::StatusOr<std::string> prompt =
        RenderPrompt(options.prompt_template, schema, record);
    if (!prompt.ok()) {
      results[i] = prompt.status();
      return;
    }
    results[i] = GenerateNote(config, transport, *prompt, options.prompt_template.id,
                              note_seed, [&] {
                                return FallbackNote(schema, record,
                                                    options.prompt_template.id, note_seed,
                                                    options.include_label);
                              });
  };

  const bool remote = !config.endpoint.empty() && transport != nullptr;
  const int workers = remote ? static_cast<int>(std::min<int64_t>(config.max_in_flight, n)) : 1;
  if (workers <= 1) {
    for (int64_t i = 0; i < n; ++i) generate_one(i);
  } else {
    std::atomic<int64_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        for (int64_t i = next++; i < n; i = next++) generate_one(i);
      });
    }
    for (std::thread& t : threads) t.join();
  }

  std::vector<ClinicalNote> notes;
  notes.reserve(n);
  for (int64_t i = 0; i < n; ++i) {
    if (!results[i].ok()) {
      return absl::Status(results[i].status().code(),
                          absl::StrCat("record ", i, ": ", results[i].status().message()));
    }
    notes.push_back(*std::move(results[i]));
  }
  return notes;
}

CsvTable BimodalDataset::ToTable() const {
  CsvTable table = DatasetToTable(records);
  table.header.insert(table.header.end(), {"note", "note_source", "template_id", "note_seed"});
  for (size_t i = 0; i < notes.size(); ++i) {
    const ClinicalNote& note = notes[i];
    table.rows[i].insert(table.rows[i].end(),
                         {note.text, std::string(NoteSourceName(note.source)),
                          note.template_id, absl::StrCat(note.seed)});
  }
  return table;
}

absl::StatusOr<PairResult> PairAndExport(const Dataset& records,
                                         std::vector<ClinicalNote> notes,
                                         int64_t k_review, uint64_t seed) {
  if (records.provenance() != Provenance::kSynthetic) {
    return absl::FailedPreconditionError("pairing accepts synthetic records only");
  }
  if (static_cast<int64_t>(notes.size()) != records.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "length mismatch: ", records.size(), " records, ", notes.size(), " notes"));
  }
  if (k_review < 0 || k_review > records.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("k_review must lie in [0, ", records.size(), "], got ", k_review));
  }
  PairResult result{BimodalDataset{records, std::move(notes)}, {}};

  std::vector<int64_t> order(records.size());
  for (int64_t i = 0; i < records.size(); ++i) order[i] = i;
  Rng rng = Rng::FromSeed(seed, "review");
  rng.Shuffle(order);
  order.resize(k_review);

  const CsvTable record_table = DatasetToTable(records);
  result.review.review.header = {"review_id", "note"};
  result.review.review.header.insert(result.review.review.header.end(),
                                     record_table.header.begin(), record_table.header.end());
  result.review.review.header.push_back("judgment");
  result.review.key.header = {"review_id", "row"};
  for (int64_t j = 0; j < k_review; ++j) {
    const int64_t row = order[j];
    const std::string id = absl::StrCat("R", j + 1);
    std::vector<std::string> line = {id, result.pairs.notes[row].text};
    line.insert(line.end(), record_table.rows[row].begin(), record_table.rows[row].end());
    line.push_back("");
    result.review.review.rows.push_back(std::move(line));
    result.review.key.rows.push_back({id, absl::StrCat(row)});
  }
  return result;
}

}  // namespace psyn
