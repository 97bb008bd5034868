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

#ifndef PSYN_COMMON_FILES_H_
#define PSYN_COMMON_FILES_H_

#include <string>
#include <string_view>

#include "absl/status/statusor.h"

namespace psyn {

absl::StatusOr<std::string> ReadFile(const std::string& path);
absl::Status WriteFile(const std::string& path, std::string_view contents);

// Lower-case hex SHA-256.
std::string Sha256Hex(std::string_view bytes);
absl::StatusOr<std::string> Sha256File(const std::string& path);

// Shortest decimal string that parses back to exactly `value`.
std::string FormatDouble(double value);

}  // namespace psyn

#endif  // PSYN_COMMON_FILES_H_
