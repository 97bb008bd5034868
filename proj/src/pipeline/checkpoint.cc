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

#include "psyn/pipeline/checkpoint.h"

#include <bit>
#include <cstring>

#include "absl/strings/escaping.h"
#include "absl/strings/str_cat.h"
#include "psyn/common/files.h"
#include "psyn/common/status_macros.h"

namespace psyn {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'P', 'S', 'Y', 'N'};
constexpr size_t kHashBytes = 32;

absl::Status Corrupt(absl::string_view detail) {
  return absl::DataLossError(absl::StrCat("corrupt checkpoint: ", detail));
}

void PutU32(std::string* out, uint32_t v) {
  char bytes[4];
  std::memcpy(bytes, &v, 4);
  out->append(bytes, 4);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  absl::StatusOr<std::string_view> Take(size_t n) {
    if (bytes_.size() - pos_ < n) return Corrupt("truncated");
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  absl::StatusOr<uint32_t> U32() {
    PSYN_ASSIGN_OR_RETURN(std::string_view b, Take(4));
    uint32_t v;
    std::memcpy(&v, b.data(), 4);
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  size_t pos_ = 0;
};

}  // namespace

absl::StatusOr<std::string> SerializeCheckpoint(const GeneratorModel& model,
                                                const Schema& schema,
                                                const AccountantState& accountant) {
  const std::string hash_hex = schema.Hash();
  if (model.layout().schema_hash() != hash_hex) {
    return absl::FailedPreconditionError("model layout was fitted on a different schema");
  }
  const std::string hash = absl::HexStringToBytes(hash_hex);
  const nlohmann::json header = {{"schema", schema.ToJson()},
                                 {"encoder", model.layout().ToJson()},
                                 {"hyperparameters", model.Hyperparameters()},
                                 {"accountant", accountant.ToJson()}};
  const std::string header_text = header.dump();
  const ParameterSet params = model.Parameters();

  std::string out(kMagic, 4);
  PutU32(&out, kCheckpointVersion);
  PutU32(&out, static_cast<uint32_t>(model.kind()));
  out += hash;
  PutU32(&out, static_cast<uint32_t>(header_text.size()));
  out += header_text;
  PutU32(&out, static_cast<uint32_t>(params.size()));
  for (size_t i = 0; i < params.size(); ++i) {
    PutU32(&out, static_cast<uint32_t>(params[i].rows()));
    PutU32(&out, static_cast<uint32_t>(params[i].cols()));
  }
  for (size_t i = 0; i < params.size(); ++i) {
    const Eigen::MatrixXd& t = params[i];
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) {
        const double v = t(r, c);
        char bytes[8];
        std::memcpy(bytes, &v, 8);
        out.append(bytes, 8);
      }
    }
  }
  return out;
}

absl::StatusOr<Checkpoint> DeserializeCheckpoint(std::string_view bytes) {
  Reader in(bytes);
  PSYN_ASSIGN_OR_RETURN(std::string_view magic, in.Take(4));
  if (magic != std::string_view(kMagic, 4)) return Corrupt("bad magic bytes");
  PSYN_ASSIGN_OR_RETURN(const uint32_t version, in.U32());
  if (version != kCheckpointVersion) {
    return absl::FailedPreconditionError(absl::StrCat(
        "unsupported checkpoint version ", version, " (this build reads version ",
        kCheckpointVersion, ")"));
  }
  PSYN_ASSIGN_OR_RETURN(const uint32_t kind_code, in.U32());
  if (kind_code != static_cast<uint32_t>(ModelKind::kVae) &&
      kind_code != static_cast<uint32_t>(ModelKind::kDdpm)) {
    return Corrupt(absl::StrCat("unknown model kind ", kind_code));
  }
  const ModelKind kind = static_cast<ModelKind>(kind_code);
  PSYN_ASSIGN_OR_RETURN(std::string_view hash, in.Take(kHashBytes));
  PSYN_ASSIGN_OR_RETURN(const uint32_t header_size, in.U32());
  PSYN_ASSIGN_OR_RETURN(std::string_view header_text, in.Take(header_size));
  const nlohmann::json header = nlohmann::json::parse(header_text, nullptr, false);
  if (header.is_discarded() || !header.is_object()) return Corrupt("unreadable header");
  for (const char* key : {"schema", "encoder", "hyperparameters", "accountant"}) {
    if (!header.contains(key)) return Corrupt(absl::StrCat("header lacks '", key, "'"));
  }

  PSYN_ASSIGN_OR_RETURN(Schema schema, Schema::FromJson(header["schema"]));
  if (absl::BytesToHexString(absl::string_view(hash.data(), hash.size())) != schema.Hash()) {
    return Corrupt("schema hash does not match the embedded schema");
  }
  PSYN_ASSIGN_OR_RETURN(EncoderState encoder, EncoderState::FromJson(header["encoder"]));
  if (encoder.schema_hash() != schema.Hash()) {
    return Corrupt("encoder state belongs to a different schema");
  }
  PSYN_ASSIGN_OR_RETURN(AccountantState accountant,
                        AccountantState::FromJson(header["accountant"]));

  PSYN_ASSIGN_OR_RETURN(const uint32_t count, in.U32());
  std::vector<std::pair<uint32_t, uint32_t>> shapes(count);
  for (auto& [rows, cols] : shapes) {
    PSYN_ASSIGN_OR_RETURN(rows, in.U32());
    PSYN_ASSIGN_OR_RETURN(cols, in.U32());
  }
  ParameterSet params;
  for (const auto& [rows, cols] : shapes) {
    PSYN_ASSIGN_OR_RETURN(std::string_view payload,
                          in.Take(static_cast<size_t>(rows) * cols * 8));
    Eigen::MatrixXd t(rows, cols);
    size_t offset = 0;
    for (uint32_t r = 0; r < rows; ++r) {
      for (uint32_t c = 0; c < cols; ++c) {
        std::memcpy(&t(r, c), payload.data() + offset, 8);
        offset += 8;
      }
    }
    params.push_back(std::move(t));
  }
  if (!in.done()) return Corrupt("trailing bytes after payload");

  PSYN_ASSIGN_OR_RETURN(std::unique_ptr<GeneratorModel> model,
                        CreateGenerator(kind, header["hyperparameters"], encoder, 0));
  const ParameterSet expected = model->Parameters();
  if (!expected.SameShape(params)) return Corrupt("tensor shapes do not match the model");
  PSYN_RETURN_IF_ERROR(model->SetParameters(params));
  return Checkpoint{std::move(model), std::move(schema), std::move(accountant)};
}

absl::Status SaveCheckpoint(const std::string& path, const GeneratorModel& model,
                            const Schema& schema, const AccountantState& accountant) {
  PSYN_ASSIGN_OR_RETURN(const std::string bytes,
                        SerializeCheckpoint(model, schema, accountant));
  return WriteFile(path, bytes);
}

absl::StatusOr<Checkpoint> LoadCheckpoint(const std::string& path) {
  PSYN_ASSIGN_OR_RETURN(const std::string bytes, ReadFile(path));
  return DeserializeCheckpoint(bytes);
}

}  // namespace psyn
