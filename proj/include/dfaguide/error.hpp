// Copyright 2026 The dfaguide Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace dfaguide {

// Numeric values double as CLI exit codes where they overlap (2, 3, 4).
enum class ErrorCode : int {
  kInput = 2,
  kUnsatisfiable = 3,
  kInternal = 4,
  kIo = 5,
  kStructure = 6,
  kDeadEnd = 7,
  kBudget = 8,
  kSessionExhausted = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define DFAGUIDE_DEFINE_ERROR(Name, Code)                                   \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& message) : Error(Code, message) {}     \
  }

DFAGUIDE_DEFINE_ERROR(InputError, ErrorCode::kInput);
DFAGUIDE_DEFINE_ERROR(UnsatisfiableError, ErrorCode::kUnsatisfiable);
DFAGUIDE_DEFINE_ERROR(InternalError, ErrorCode::kInternal);
DFAGUIDE_DEFINE_ERROR(IoError, ErrorCode::kIo);
// Raised when an automaton does not have the shape an operation requires.
DFAGUIDE_DEFINE_ERROR(StructureError, ErrorCode::kStructure);
// No token has positive mass under the guided distribution.
DFAGUIDE_DEFINE_ERROR(DeadEndError, ErrorCode::kDeadEnd);
DFAGUIDE_DEFINE_ERROR(BudgetError, ErrorCode::kBudget);
DFAGUIDE_DEFINE_ERROR(SessionExhaustedError, ErrorCode::kSessionExhausted);

#undef DFAGUIDE_DEFINE_ERROR

}  // namespace dfaguide
