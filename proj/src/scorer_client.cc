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

#include "figcap/scorer_client.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <variant>

#include "figcap/textkit.h"
#include "httplib.h"

namespace figcap {
namespace {

struct Failure {
  ErrorCode code;
  std::string message;
};

httplib::Client MakeClient(const std::string& endpoint,
                           std::chrono::milliseconds timeout) {
  httplib::Client client(endpoint);
  const auto sec = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usec =
      std::chrono::duration_cast<std::chrono::microseconds>(timeout - sec);
  client.set_connection_timeout(sec.count(), usec.count());
  client.set_read_timeout(sec.count(), usec.count());
  client.set_write_timeout(sec.count(), usec.count());
  return client;
}

Failure TransportFailure(httplib::Error error, const std::string& endpoint) {
  const std::string detail = endpoint + ": " + httplib::to_string(error);
  switch (error) {
    case httplib::Error::Read:
    case httplib::Error::ConnectionTimeout:
      return {ErrorCode::kTimeout, "timed out: " + detail};
    default:
      return {ErrorCode::kConnection, "connection failed: " + detail};
  }
}

// POSTs `body` and parses the JSON reply, or reports why it could not.
std::variant<nlohmann::json, Failure> PostJson(
    const std::string& endpoint, const char* path,
    const nlohmann::json& body, const ClientOptions& options) {
  httplib::Client client = MakeClient(endpoint, options.timeout);
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) return TransportFailure(res.error(), endpoint);
  if (res->status != 200) {
    return Failure{ErrorCode::kMalformedResponse,
                   std::string(path) + " returned HTTP " +
                       std::to_string(res->status)};
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    return Failure{ErrorCode::kMalformedResponse,
                   std::string(path) + " returned invalid JSON: " + e.what()};
  }
}

}  // namespace

std::vector<ScoreResponse> ScoreBatch(const std::string& endpoint,
                                      std::span<const ScoreRequest> requests,
                                      const ClientOptions& options) {
  if (requests.empty() || requests.size() > kMaxBatchSize) {
    throw Error(ErrorCode::kInvalidBatch,
                "batch size must be in [1, 256], got " +
                    std::to_string(requests.size()));
  }
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (!position.emplace(requests[i].request_id, i).second) {
      throw Error(ErrorCode::kInvalidBatch,
                  "repeated request_id " + requests[i].request_id);
    }
    if (Tokenize(requests[i].output).empty()) {
      throw Error(ErrorCode::kInvalidOutput,
                  "empty output in request " + requests[i].request_id);
    }
  }

  std::vector<ScoreResponse> responses(requests.size());
  std::set<std::size_t> pending;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    responses[i].request_id = requests[i].request_id;
    pending.insert(i);
  }

  bool any_reply = false;
  Failure last{ErrorCode::kConnection, "no attempt made"};
  for (int attempt = 0; attempt <= options.max_retries && !pending.empty();
       ++attempt) {
    nlohmann::json body;
    body["requests"] = nlohmann::json::array();
    for (std::size_t i : pending) {
      body["requests"].push_back({{"request_id", requests[i].request_id},
                                  {"context", requests[i].context},
                                  {"output", requests[i].output}});
    }
    auto reply = PostJson(endpoint, "/v1/score", body, options);
    if (auto* failure = std::get_if<Failure>(&reply)) {
      last = *failure;
      continue;
    }
    const auto& json = std::get<nlohmann::json>(reply);
    const auto it = json.find("responses");
    if (!json.is_object() || it == json.end() || !it->is_array()) {
      last = {ErrorCode::kMalformedResponse,
              "/v1/score reply lacks a 'responses' array"};
      continue;
    }
    any_reply = true;
    for (const auto& item : *it) {
      if (!item.is_object()) continue;
      const auto id_it = item.find("request_id");
      if (id_it == item.end() || !id_it->is_string()) continue;
      const auto pos = position.find(id_it->get<std::string>());
      // Unknown ids and answers to already settled requests are ignored so a
      // retried request can never be counted twice.
      if (pos == position.end() || !pending.contains(pos->second)) continue;
      ScoreResponse& out = responses[pos->second];
      const auto lp = item.find("log_prob");
      if (lp == item.end() || !lp->is_number() ||
          !std::isfinite(lp->get<double>()) || lp->get<double>() > 0.0) {
        out.error = ErrorCode::kProtocolViolation;
        out.error_message = "invalid log_prob for " + out.request_id + ": " +
                            (lp == item.end() ? "missing" : lp->dump());
      } else {
        out.log_prob = lp->get<double>();
      }
      pending.erase(pos->second);
    }
    if (!pending.empty()) {
      last = {ErrorCode::kMalformedResponse,
              "/v1/score reply omitted " + std::to_string(pending.size()) +
                  " request(s)"};
    }
  }

  if (!any_reply) throw Error(last.code, last.message);
  for (std::size_t i : pending) {
    responses[i].error = last.code == ErrorCode::kConnection ||
                                 last.code == ErrorCode::kTimeout
                             ? last.code
                             : ErrorCode::kMalformedResponse;
    responses[i].error_message =
        "no response for " + responses[i].request_id + " after " +
        std::to_string(options.max_retries + 1) + " attempts";
  }
  return responses;
}

std::vector<std::vector<Candidate>> GenerateBatch(
    const std::string& endpoint, std::span<const GenerateRequest> prompts,
    int samples_per_prompt, int seed, const std::string& source_model,
    const ClientOptions& options) {
  if (samples_per_prompt < 1) {
    throw Error(ErrorCode::kInvalidParameter,
                "samples_per_prompt must be >= 1");
  }
  if (prompts.empty() || prompts.size() > kMaxBatchSize) {
    throw Error(ErrorCode::kInvalidBatch,
                "batch size must be in [1, 256], got " +
                    std::to_string(prompts.size()));
  }
  std::unordered_map<std::string, std::size_t> position;
  nlohmann::json body;
  body["prompts"] = nlohmann::json::array();
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    if (!position.emplace(prompts[i].request_id, i).second) {
      throw Error(ErrorCode::kInvalidBatch,
                  "repeated request_id " + prompts[i].request_id);
    }
    body["prompts"].push_back(
        {{"request_id", prompts[i].request_id}, {"text", prompts[i].text}});
  }
  body["samples_per_prompt"] = samples_per_prompt;
  body["seed"] = seed;

  Failure last{ErrorCode::kConnection, "no attempt made"};
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    auto reply = PostJson(endpoint, "/v1/generate", body, options);
    if (auto* failure = std::get_if<Failure>(&reply)) {
      last = *failure;
      continue;
    }
    const auto& json = std::get<nlohmann::json>(reply);
    const auto it = json.find("results");
    if (!json.is_object() || it == json.end() || !it->is_array()) {
      last = {ErrorCode::kMalformedResponse,
              "/v1/generate reply lacks a 'results' array"};
      continue;
    }
    std::vector<std::optional<std::vector<Candidate>>> out(prompts.size());
    for (const auto& item : *it) {
      if (!item.is_object() || !item.contains("request_id") ||
          !item["request_id"].is_string() || !item.contains("candidates") ||
          !item["candidates"].is_array()) {
        throw Error(ErrorCode::kMalformedResponse,
                    "malformed /v1/generate result: " + item.dump());
      }
      const auto pos = position.find(item["request_id"].get<std::string>());
      if (pos == position.end()) continue;
      const auto& texts = item["candidates"];
      if (texts.size() != static_cast<std::size_t>(samples_per_prompt)) {
        throw Error(ErrorCode::kMalformedResponse,
                    "expected " + std::to_string(samples_per_prompt) +
                        " candidates for " + pos->first + ", got " +
                        std::to_string(texts.size()));
      }
      std::vector<Candidate> candidates;
      for (int k = 0; k < samples_per_prompt; ++k) {
        if (!texts[k].is_string()) {
          throw Error(ErrorCode::kMalformedResponse,
                      "non-string candidate for " + pos->first);
        }
        candidates.push_back({texts[k].get<std::string>(), source_model, 0, k});
      }
      out[pos->second] = std::move(candidates);
    }
    std::vector<std::vector<Candidate>> aligned;
    aligned.reserve(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!out[i]) {
        throw Error(ErrorCode::kMalformedResponse,
                    "no result for " + prompts[i].request_id);
      }
      aligned.push_back(std::move(*out[i]));
    }
    return aligned;
  }
  throw Error(last.code, last.message);
}

bool ProbeService(const std::string& endpoint,
                  std::chrono::milliseconds timeout) {
  httplib::Client client = MakeClient(endpoint, timeout);
  auto res = client.Get("/healthz");
  return res && res->status == 200;
}

std::vector<double> RemoteLikelihoodModel::LogProbs(
    std::span<const LikelihoodQuery> queries) const {
  std::vector<double> out;
  out.reserve(queries.size());
  for (std::size_t start = 0; start < queries.size(); start += kMaxBatchSize) {
    const std::size_t end = std::min(queries.size(), start + kMaxBatchSize);
    std::vector<ScoreRequest> batch;
    batch.reserve(end - start);
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back({"q" + std::to_string(i), queries[i].context,
                       queries[i].output});
    }
    for (const ScoreResponse& r : ScoreBatch(endpoint_, batch, options_)) {
      if (!r.ok()) throw Error(*r.error, r.error_message);
      out.push_back(r.log_prob);
    }
  }
  return out;
}

}  // namespace figcap
