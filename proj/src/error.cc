// Copyright 2026 The Figcap Authors.
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

#include "figcap/error.h"

namespace figcap {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidOrder: return "invalid-order";
    case ErrorCode::kEmptyCorpus: return "empty-corpus";
    case ErrorCode::kInvalidParameter: return "invalid-parameter";
    case ErrorCode::kInvalidOutput: return "invalid-output";
    case ErrorCode::kCapacity: return "capacity";
    case ErrorCode::kEmptyPool: return "empty-pool";
    case ErrorCode::kDuplicateCandidate: return "duplicate-candidate";
    case ErrorCode::kMissingRecord: return "missing-record";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kDuplicateRecord: return "duplicate-record";
    case ErrorCode::kInvalidBatch: return "invalid-batch";
    case ErrorCode::kConnection: return "connection";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kMalformedResponse: return "malformed-response";
    case ErrorCode::kProtocolViolation: return "protocol-violation";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace figcap
