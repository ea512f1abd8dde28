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

#ifndef FIGCAP_ERROR_H_
#define FIGCAP_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace figcap {

enum class ErrorCode {
  kInvalidOrder,
  kEmptyCorpus,
  kInvalidParameter,
  kInvalidOutput,
  kCapacity,
  kEmptyPool,
  kDuplicateCandidate,
  kMissingRecord,
  kParse,
  kDuplicateRecord,
  kInvalidBatch,
  kConnection,
  kTimeout,
  kMalformedResponse,
  kProtocolViolation,
  kConfig,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported as figcap::Error; callers branch on
// code() rather than on message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace figcap

#endif  // FIGCAP_ERROR_H_
