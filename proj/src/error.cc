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

#include "kgsynth/error.h"

namespace kgsynth {

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedLine: return "E_MALFORMED_LINE";
    case ErrorCode::kEmptyGraph: return "E_EMPTY_GRAPH";
    case ErrorCode::kIo: return "E_IO";
    case ErrorCode::kUnknownId: return "E_UNKNOWN_ID";
    case ErrorCode::kContract: return "E_CONTRACT";
    case ErrorCode::kSyntax: return "E_SYNTAX";
    case ErrorCode::kUnknownPattern: return "E_UNKNOWN_PATTERN";
    case ErrorCode::kOracleTooLarge: return "E_ORACLE_TOO_LARGE";
    case ErrorCode::kInstantiation: return "E_INSTANTIATION";
    case ErrorCode::kShortfall: return "E_SHORTFALL";
    case ErrorCode::kMissingApi: return "E_MISSING_API";
    case ErrorCode::kUnknownApi: return "E_UNKNOWN_API";
    case ErrorCode::kIntegrity: return "E_INTEGRITY";
    case ErrorCode::kUnverified: return "E_UNVERIFIED";
    case ErrorCode::kUnserializable: return "E_UNSERIALIZABLE";
    case ErrorCode::kOffline: return "E_OFFLINE";
    case ErrorCode::kTransport: return "E_TRANSPORT";
    case ErrorCode::kBadResponse: return "E_BAD_RESPONSE";
    case ErrorCode::kInvalidConfig: return "E_INVALID_CONFIG";
  }
  return "E_UNKNOWN";
}

bool is_integrity_failure(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIntegrity:
    case ErrorCode::kUnknownApi:
    case ErrorCode::kUnverified:
      return true;
    default:
      return false;
  }
}

}  // namespace kgsynth
