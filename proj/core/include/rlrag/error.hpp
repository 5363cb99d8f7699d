// Copyright 2026 The rlrag Authors
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

#ifndef RLRAG_ERROR_HPP_
#define RLRAG_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace rlrag {

enum class ErrorCode {
  kInvalidArgument,
  kDuplicateId,
  kNotFound,
  kDimensionMismatch,
  kCorruptData,
  kNonFinite,
  kIllegalAction,
  kReasoner,
  kSchema,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure surfaced by the library is an Error; `code()` is stable and
// safe to branch on, `what()` is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Failure talking to a remote reasoner. `status` is the HTTP status, or 0
// when no response arrived (connect failure, timeout).
class ReasonerError : public Error {
 public:
  ReasonerError(int status, std::string body, const std::string& message)
      : Error(ErrorCode::kReasoner, message),
        status_(status),
        body_(std::move(body)) {}

  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

}  // namespace rlrag

#endif  // RLRAG_ERROR_HPP_
