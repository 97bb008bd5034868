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

#ifndef PSYN_PIPELINE_CHECKPOINT_H_
#define PSYN_PIPELINE_CHECKPOINT_H_

#include <cstdint>
#include <memory>
#include <string>

#include "absl/status/statusor.h"
#include "psyn/models/generator.h"
#include "psyn/privacy/rdp_accountant.h"
#include "psyn/tabular/schema.h"

namespace psyn {

// Binary layout, all integers little-endian:
//
//   "PSYN"                     4 bytes magic
//   version                    u32
//   model kind                 u32 (1 = vae, 2 = ddpm)
//   schema hash                32 bytes (SHA-256)
//   header length              u32
//   header                     JSON {schema, encoder, hyperparameters, accountant}
//   tensor count               u32
//   shape table                u32 rows, u32 cols per tensor
//   payload                    f64 row-major per tensor, in table order
inline constexpr uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::unique_ptr<GeneratorModel> model;
  Schema schema;
  AccountantState accountant;
};

absl::StatusOr<std::string> SerializeCheckpoint(const GeneratorModel& model,
                                                const Schema& schema,
                                                const AccountantState& accountant);
absl::StatusOr<Checkpoint> DeserializeCheckpoint(std::string_view bytes);

absl::Status SaveCheckpoint(const std::string& path, const GeneratorModel& model,
                            const Schema& schema, const AccountantState& accountant);
absl::StatusOr<Checkpoint> LoadCheckpoint(const std::string& path);

}  // namespace psyn

#endif  // PSYN_PIPELINE_CHECKPOINT_H_
