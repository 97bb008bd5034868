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

#ifndef PSYN_COMMON_STATUS_MACROS_H_
#define PSYN_COMMON_STATUS_MACROS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define PSYN_STATUS_CONCAT_INNER_(a, b) a##b
#define PSYN_STATUS_CONCAT_(a, b) PSYN_STATUS_CONCAT_INNER_(a, b)

#define PSYN_RETURN_IF_ERROR(expr)          \
  do {                                      \
    const absl::Status _psyn_status = (expr); \
    if (!_psyn_status.ok()) return _psyn_status; \
  } while (0)

#define PSYN_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, rexpr) \
  auto tmp = (rexpr);                                \
  if (!tmp.ok()) return tmp.status();                \
  lhs = std::move(tmp).value()

// Evaluates `rexpr` (an absl::StatusOr<T>) and either assigns the value to
// `lhs` or returns the error from the enclosing function.
#define PSYN_ASSIGN_OR_RETURN(lhs, rexpr) \
  PSYN_ASSIGN_OR_RETURN_IMPL_(            \
      PSYN_STATUS_CONCAT_(_psyn_statusor_, __LINE__), lhs, rexpr)

#endif  // PSYN_COMMON_STATUS_MACROS_H_
