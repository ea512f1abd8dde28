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

#ifndef FIGCAP_SCORER_CLIENT_H_
#define FIGCAP_SCORER_CLIENT_H_

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "figcap/ensemble.h"
#include "figcap/error.h"
#include "figcap/filter.h"
#include "json.hpp"

namespace figcap {

// JSON-over-HTTP client for an external scoring/generation service:
//
//   POST /v1/score
//     {"requests":[{"request_id":s,"context":s,"output":s}]}
//     -> {"responses":[{"request_id":s,"log_prob":f}]}
//   POST /v1/generate
//     {"prompts":[{"request_id":s,"text":s}],"samples_per_prompt":i,"seed":i}
//     -> {"results":[{"request_id":s,"candidates":[s]}]}
//   GET /healthz -> 200
//
// Responses are matched to requests by request_id, never by position.

inline constexpr std::size_t kMaxBatchSize = 256;

struct ClientOptions {
  std::chrono::milliseconds timeout{10000};
  int max_retries = 2;
};

struct ScoreRequest {
  std::string request_id;
  std::string context;
  std::string output;
};

struct ScoreResponse {
  std::string request_id;
  double log_prob = 0.0;
  // Set when this request could not be scored; log_prob is then meaningless.
  std::optional<ErrorCode> error;
  std::string error_message;

  bool ok() const { return !error.has_value(); }
};

// Throws kInvalidBatch for an empty or oversized batch or repeated
// request_ids, kInvalidOutput for an empty output, and kConnection /
// kTimeout / kMalformedResponse when every attempt failed as a whole.
// Requests still unanswered after all retries come back with an error
// marker; non-finite or positive log_probs are marked kProtocolViolation.
std::vector<ScoreResponse> ScoreBatch(const std::string& endpoint,
                                      std::span<const ScoreRequest> requests,
                                      const ClientOptions& options = {});

struct GenerateRequest {
  std::string request_id;
  std::string text;
};

// Each prompt yields exactly `samples_per_prompt` candidates tagged with
// `source_model`, epoch 0 and sample_index 0..k-1. Throws kInvalidParameter
// when samples_per_prompt < 1 and kMalformedResponse when a result is
// missing or has the wrong number of candidates.
std::vector<std::vector<Candidate>> GenerateBatch(
    const std::string& endpoint, std::span<const GenerateRequest> prompts,
    int samples_per_prompt, int seed, const std::string& source_model,
    const ClientOptions& options = {});

// GET /healthz returned 200 within the timeout.
bool ProbeService(const std::string& endpoint,
                  std::chrono::milliseconds timeout);

// LikelihoodModel backed by /v1/score. Splits large query lists into
// batches of at most kMaxBatchSize and throws the first per-request error.
class RemoteLikelihoodModel : public LikelihoodModel {
 public:
  explicit RemoteLikelihoodModel(std::string endpoint,
                                 ClientOptions options = {})
      : endpoint_(std::move(endpoint)), options_(options) {}

  std::vector<double> LogProbs(
      std::span<const LikelihoodQuery> queries) const override;

 private:
  std::string endpoint_;
  ClientOptions options_;
};

}  // namespace figcap

#endif  // FIGCAP_SCORER_CLIENT_H_
