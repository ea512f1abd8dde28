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

#ifndef FIGCAP_FILTER_H_
#define FIGCAP_FILTER_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "figcap/textkit.h"
#include "json.hpp"

namespace figcap {

struct LikelihoodQuery {
  std::string context;
  std::string output;
};

// Anything that can report log P(output | context) in natural log. The
// built-in CacheScorer and the remote scoring client both implement it.
// Implementations must be safe to call concurrently.
class LikelihoodModel {
 public:
  virtual ~LikelihoodModel() = default;

  virtual std::vector<double> LogProbs(
      std::span<const LikelihoodQuery> queries) const = 0;

  double LogProb(std::string_view context, std::string_view output) const;
};

// Unigram background model interpolated with a unigram cache over the
// context:
//   P(w | ctx) = (1 - alpha) * P_bg(w) + alpha * P_cache(w | ctx)
//   P_bg(w)    = (count(w) + k) / (total + k * (V + 1))
//   P_cache(w) = (count_ctx(w) + beta) / (|ctx| + beta * (V + 1))
// Out-of-vocabulary tokens share one unknown bucket in both terms, so the
// conditional distribution over V + 1 outcomes sums to one. Immutable after
// Fit().
class CacheScorer : public LikelihoodModel {
 public:
  // Throws kEmptyCorpus on an empty corpus (or one without tokens) and
  // kInvalidParameter unless 0 <= alpha < 1, beta > 0, k > 0.
  static CacheScorer Fit(std::span<const TokenSeq> corpus, double alpha,
                         double beta, double k);

  std::vector<double> LogProbs(
      std::span<const LikelihoodQuery> queries) const override;

  // Throws kInvalidOutput when `output` has no tokens.
  double ConditionalLogProb(std::string_view context,
                            std::string_view output) const;

  // Probability of each vocabulary entry in Vocabulary() order, followed by
  // the unknown bucket.
  std::vector<double> ConditionalDistribution(std::string_view context) const;

  double BackgroundProb(std::string_view token) const;
  double UnknownBackgroundProb() const { return background_.back(); }

  // Sorted vocabulary.
  const std::vector<std::string>& Vocabulary() const { return vocabulary_; }
  std::size_t vocab_size() const { return vocabulary_.size(); }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

 private:
  CacheScorer() = default;

  std::size_t Bucket(std::string_view token) const;
  std::vector<std::size_t> ContextCounts(const TokenSeq& context) const;

  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> background_;  // V + 1 entries, unknown last
  double alpha_ = 0.0;
  double beta_ = 1.0;
};

// Single-space concatenation of chunk and mention (chunk first).
std::string ChunkWithMention(std::string_view chunk, std::string_view mention);

// I(c) = P(o | c + m) / P(o | m), evaluated as exp of a log difference.
double RelevanceRatio(const LikelihoodModel& model, const Chunk& chunk,
                      std::string_view mention, std::string_view output);

struct ScoredChunk {
  Chunk chunk;
  double log_ratio = 0.0;
  double ratio = 1.0;
  bool kept = false;
};

struct FilteredParagraph {
  std::string text;
  std::vector<std::size_t> kept_indices;
  double lambda_used = 1.0;
  // Set when chunks existed but none reached the threshold; text is empty.
  bool all_filtered = false;
};

struct FilterResult {
  std::vector<ScoredChunk> scored;
  FilteredParagraph paragraph;
};

inline constexpr double kDefaultLambda = 1.0;

// Log relevance ratios for every chunk, issued to the model as one batch
// (the mention-only denominator first).
std::vector<double> ScoreChunkLogRatios(const LikelihoodModel& model,
                                        std::span<const Chunk> chunks,
                                        std::string_view mention,
                                        std::string_view output);

// Keeps chunks with ratio >= lambda. Throws kInvalidParameter for negative
// or NaN lambda.
FilterResult ApplyThreshold(std::span<const Chunk> chunks,
                            std::span<const double> log_ratios, double lambda);

FilterResult FilterParagraph(const LikelihoodModel& model,
                             std::span<const std::string> paragraphs,
                             std::string_view mention, std::string_view output,
                             double lambda);

// {record_id, chunk_index, ratio, kept, lambda}
nlohmann::ordered_json ScoredChunkToJson(std::string_view record_id,
                                         const ScoredChunk& scored,
                                         double lambda);

}  // namespace figcap

#endif  // FIGCAP_FILTER_H_
