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

#include "figcap/ensemble.h"

#include <algorithm>
#include <cstdint>
#include <set>
#include <tuple>
#include <unordered_map>
#include <utility>

#include "figcap/error.h"
#include "figcap/jsonl.h"
#include "figcap/metrics.h"
#include "figcap/textkit.h"

namespace figcap {
namespace {

// Bigram multiset over pool-local token ids, sorted by key.
struct BigramProfile {
  std::vector<std::pair<std::uint64_t, int>> bigrams;
  std::size_t bigram_total = 0;
  std::size_t token_count = 0;
};

std::vector<BigramProfile> BuildProfiles(const CandidatePool& pool) {
  std::unordered_map<std::string, std::uint32_t> ids;
  std::vector<BigramProfile> profiles;
  profiles.reserve(pool.candidates.size());
  for (const Candidate& candidate : pool.candidates) {
    const TokenSeq tokens = Tokenize(candidate.text);
    std::vector<std::uint64_t> keys;
    std::uint64_t prev = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto [it, inserted] = ids.try_emplace(
          tokens[i], static_cast<std::uint32_t>(ids.size()));
      const std::uint64_t id = it->second;
      if (i > 0) keys.push_back((prev << 32) | id);
      prev = id;
    }
    std::sort(keys.begin(), keys.end());
    BigramProfile profile;
    profile.token_count = tokens.size();
    profile.bigram_total = keys.size();
    for (std::uint64_t key : keys) {
      if (!profile.bigrams.empty() && profile.bigrams.back().first == key) {
        ++profile.bigrams.back().second;
      } else {
        profile.bigrams.emplace_back(key, 1);
      }
    }
    profiles.push_back(std::move(profile));
  }
  return profiles;
}

std::size_t Overlap(const BigramProfile& a, const BigramProfile& b) {
  std::size_t overlap = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.bigrams.size() && j < b.bigrams.size()) {
    if (a.bigrams[i].first < b.bigrams[j].first) {
      ++i;
    } else if (b.bigrams[j].first < a.bigrams[i].first) {
      ++j;
    } else {
      overlap += static_cast<std::size_t>(
          std::min(a.bigrams[i].second, b.bigrams[j].second));
      ++i;
      ++j;
    }
  }
  return overlap;
}

// Mirrors RougeNNormalized(hyp, ref, 2) operation for operation.
double ProfileSimilarity(std::size_t overlap, const BigramProfile& reference) {
  const double recall =
      reference.bigram_total > 0
          ? static_cast<double>(overlap) /
                static_cast<double>(reference.bigram_total)
          : 0.0;
  return NormalizeRecall(recall, reference.token_count);
}

void RequireScorable(const CandidatePool& pool) {
  if (pool.candidates.size() < 2) {
    throw Error(ErrorCode::kEmptyPool,
                "consensus scoring needs at least 2 candidates (record " +
                    pool.record_id + ")");
  }
}

std::string RequireString(const nlohmann::json& json, const char* key) {
  const auto it = json.find(key);
  if (it == json.end() || !it->is_string()) {
    throw Error(ErrorCode::kParse,
                std::string("missing or non-string field '") + key + "'");
  }
  return it->get<std::string>();
}

int RequireInt(const nlohmann::json& json, const char* key) {
  const auto it = json.find(key);
  if (it == json.end() || !it->is_number_integer()) {
    throw Error(ErrorCode::kParse,
                std::string("missing or non-integer field '") + key + "'");
  }
  return it->get<int>();
}

}  // namespace

double DefaultSimilarity(const std::string& hypothesis,
                         const std::string& reference) {
  return RougeNNormalized(Tokenize(hypothesis), Tokenize(reference), 2);
}

std::vector<double> ConsensusScores(const CandidatePool& pool,
                                    const Similarity& sim) {
  RequireScorable(pool);
  const std::size_t n = pool.candidates.size();
  std::vector<double> scores(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      if (m == i) continue;
      sum += sim(pool.candidates[i].text, pool.candidates[m].text);
    }
    scores[i] = sum / static_cast<double>(n - 1);
  }
  return scores;
}

std::vector<double> ConsensusScores(const CandidatePool& pool) {
  RequireScorable(pool);
  const std::size_t n = pool.candidates.size();
  const std::vector<BigramProfile> profiles = BuildProfiles(pool);
  std::vector<double> sim(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = i + 1; m < n; ++m) {
      const std::size_t overlap = Overlap(profiles[i], profiles[m]);
      sim[i * n + m] = ProfileSimilarity(overlap, profiles[m]);
      sim[m * n + i] = ProfileSimilarity(overlap, profiles[i]);
    }
  }
  std::vector<double> scores(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      if (m != i) sum += sim[i * n + m];
    }
    scores[i] = sum / static_cast<double>(n - 1);
  }
  return scores;
}

std::size_t ArgmaxLowestIndex(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

namespace {

ConsensusResult Select(const CandidatePool& pool,
                       const std::function<std::vector<double>()>& score) {
  if (pool.candidates.empty()) {
    throw Error(ErrorCode::kEmptyPool,
                "empty candidate pool (record " + pool.record_id + ")");
  }
  ConsensusResult result;
  result.scores = pool.candidates.size() == 1 ? std::vector<double>{0.0}
                                              : score();
  result.winner_index = ArgmaxLowestIndex(result.scores);
  result.winner = pool.candidates[result.winner_index];
  return result;
}

}  // namespace

ConsensusResult SelectCaption(const CandidatePool& pool) {
  return Select(pool, [&] { return ConsensusScores(pool); });
}

ConsensusResult SelectCaption(const CandidatePool& pool,
                              const Similarity& sim) {
  return Select(pool, [&] { return ConsensusScores(pool, sim); });
}

Candidate CandidateFromJson(const nlohmann::json& json,
                            std::string* record_id) {
  if (!json.is_object()) {
    throw Error(ErrorCode::kParse, "candidate line is not a JSON object");
  }
  Candidate candidate;
  *record_id = RequireString(json, "record_id");
  candidate.source_model = RequireString(json, "source_model");
  candidate.epoch = RequireInt(json, "epoch");
  candidate.sample_index = RequireInt(json, "sample_index");
  candidate.text = RequireString(json, "text");
  return candidate;
}

nlohmann::ordered_json CandidateToJson(std::string_view record_id,
                                       const Candidate& candidate) {
  nlohmann::ordered_json j;
  j["record_id"] = record_id;
  j["source_model"] = candidate.source_model;
  j["epoch"] = candidate.epoch;
  j["sample_index"] = candidate.sample_index;
  j["text"] = candidate.text;
  return j;
}

std::map<std::string, CandidatePool> LoadCandidatePools(
    std::span<const std::filesystem::path> sources) {
  std::map<std::string, CandidatePool> pools;
  std::map<std::string, std::set<std::tuple<std::string, int, int>>> seen;
  for (const auto& path : sources) {
    ForEachJsonLine(path, [&](const nlohmann::json& json, std::size_t line) {
      std::string record_id;
      Candidate candidate;
      try {
        candidate = CandidateFromJson(json, &record_id);
      } catch (const Error& e) {
        throw Error(e.code(), path.string() + ":" + std::to_string(line) +
                                  ": " + e.what());
      }
      auto key = std::make_tuple(candidate.source_model, candidate.epoch,
                                 candidate.sample_index);
      if (!seen[record_id].insert(std::move(key)).second) {
        throw Error(ErrorCode::kDuplicateCandidate,
                    path.string() + ":" + std::to_string(line) +
                        ": duplicate candidate (" + candidate.source_model +
                        ", epoch " + std::to_string(candidate.epoch) +
                        ", sample " + std::to_string(candidate.sample_index) +
                        ") for record " + record_id);
      }
      CandidatePool& pool = pools[record_id];
      pool.record_id = record_id;
      pool.candidates.push_back(std::move(candidate));
    });
  }
  return pools;
}

CandidatePool AssemblePool(const std::string& record_id,
                           std::span<const std::filesystem::path> sources) {
  auto pools = LoadCandidatePools(sources);
  const auto it = pools.find(record_id);
  if (it == pools.end()) {
    throw Error(ErrorCode::kMissingRecord,
                "no candidates for record " + record_id);
  }
  return std::move(it->second);
}

nlohmann::ordered_json ConsensusToJson(std::string_view record_id,
                                       const ConsensusResult& result) {
  nlohmann::ordered_json j;
  j["record_id"] = record_id;
  j["winner_index"] = result.winner_index;
  j["text"] = result.winner.text;
  j["source_model"] = result.winner.source_model;
  j["epoch"] = result.winner.epoch;
  j["sample_index"] = result.winner.sample_index;
  j["scores"] = result.scores;
  return j;
}

}  // namespace figcap
