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

#ifndef FIGCAP_ENSEMBLE_H_
#define FIGCAP_ENSEMBLE_H_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace figcap {

struct Candidate {
  std::string text;
  std::string source_model;
  int epoch = 0;
  int sample_index = 0;

  bool operator==(const Candidate&) const = default;
};

// Candidates in ingestion order; (source_model, epoch, sample_index) is
// unique within a pool.
struct CandidatePool {
  std::string record_id;
  std::vector<Candidate> candidates;
};

struct ConsensusResult {
  std::vector<double> scores;  // aligned with the pool
  std::size_t winner_index = 0;
  Candidate winner;
};

// sim(r_n, r_m): r_m plays the reference.
using Similarity =
    std::function<double(const std::string& hypothesis,
                         const std::string& reference)>;

// Normalized ROUGE-2 recall of `hypothesis` against `reference`.
double DefaultSimilarity(const std::string& hypothesis,
                         const std::string& reference);

// s_n = 1/(N-1) * sum_{m != n} sim(r_n, r_m), summed in ascending m.
// Evaluates sim exactly N * (N - 1) times. Throws kEmptyPool when N < 2.
std::vector<double> ConsensusScores(const CandidatePool& pool,
                                    const Similarity& sim);

// Same quantity for DefaultSimilarity, computed from per-candidate bigram
// profiles with each unordered pair's clipped overlap counted once.
// Bit-identical to ConsensusScores(pool, DefaultSimilarity).
std::vector<double> ConsensusScores(const CandidatePool& pool);

// Lowest index achieving the maximum. `scores` must be non-empty.
std::size_t ArgmaxLowestIndex(std::span<const double> scores);

// Singleton pools select their only candidate with score 0. Throws
// kEmptyPool on an empty pool.
ConsensusResult SelectCaption(const CandidatePool& pool);
ConsensusResult SelectCaption(const CandidatePool& pool,
                              const Similarity& sim);

// Parses one candidate line. Throws kParse on missing or mistyped fields.
Candidate CandidateFromJson(const nlohmann::json& json,
                            std::string* record_id);
nlohmann::ordered_json CandidateToJson(std::string_view record_id,
                                       const Candidate& candidate);

// Reads candidate JSONL files into pools keyed by record_id, in file order
// then line order. Throws kDuplicateCandidate when a (source_model, epoch,
// sample_index) key repeats within a record.
std::map<std::string, CandidatePool> LoadCandidatePools(
    std::span<const std::filesystem::path> sources);

// Throws kMissingRecord when no source mentions `record_id`.
CandidatePool AssemblePool(const std::string& record_id,
                           std::span<const std::filesystem::path> sources);

// {record_id, winner_index, text, source_model, epoch, sample_index, scores}
nlohmann::ordered_json ConsensusToJson(std::string_view record_id,
                                       const ConsensusResult& result);

}  // namespace figcap

#endif  // FIGCAP_ENSEMBLE_H_
