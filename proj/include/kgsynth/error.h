// Copyright 2026 The kgsynth Authors
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
#include <string_view>

namespace kgsynth {

// Machine-parseable failure categories. The CLI prints the code string and
// maps the category to an exit status.
enum class ErrorCode {
  kMalformedLine,
  kEmptyGraph,
  kIo,
  kUnknownId,
  kContract,
  kSyntax,
  kUnknownPattern,
  kOracleTooLarge,
  kInstantiation,
  kShortfall,
  kMissingApi,
  kUnknownApi,
  kIntegrity,
  kUnverified,
  kUnserializable,
  kOffline,
  kTransport,
  kBadResponse,
  kInvalidConfig,
};

std::string_view code_name(ErrorCode code);

// True for codes that indicate the data disagrees with the graph rather
// than a bad input or configuration.
bool is_integrity_failure(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kgsynth
