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

#include "figcap/filter.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "figcap/error.h"

namespace figcap {
namespace {

using BucketCounts = std::unordered_map<std::size_t, std::size_t>;

}  // namespace

double LikelihoodModel::LogProb(std::string_view context,
                                std::string_view output) const {
  const LikelihoodQuery query{std::string(context), std::string(output)};
  return LogProbs(std::span(&query, 1)).front();
}

CacheScorer CacheScorer::Fit(std::span<const TokenSeq> corpus, double alpha,
                             double beta, double k) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidParameter, "alpha must be in [0, 1)");
  }
  if (!(beta > 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "beta must be positive");
  }
  if (!(k > 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "k must be positive");
  }
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const TokenSeq& seq : corpus) {
    for (const std::string& token : seq) {
      ++counts[token];
      ++total;
    }
  }
  if (total == 0) {
    throw Error(ErrorCode::kEmptyCorpus, "cannot fit scorer on empty corpus");
  }

  CacheScorer scorer;
  scorer.alpha_ = alpha;
  scorer.beta_ = beta;
  const double vocab = static_cast<double>(counts.size());
  const double denom = static_cast<double>(total) + k * (vocab + 1.0);
  for (const auto& [token, count] : counts) {
    scorer.index_.emplace(token, scorer.vocabulary_.size());
    scorer.vocabulary_.push_back(token);
    scorer.background_.push_back((static_cast<double>(count) + k) / denom);
  }
  scorer.background_.push_back(k / denom);
  return scorer;
}

std::size_t CacheScorer::Bucket(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? vocabulary_.size() : it->second;
}

double CacheScorer::BackgroundProb(std::string_view token) const {
  return background_[Bucket(token)];
}

std::vector<double> CacheScorer::ConditionalDistribution(
    std::string_view context) const {
  const TokenSeq ctx = Tokenize(context);
  std::vector<std::size_t> counts(background_.size(), 0);
  for (const std::string& token : ctx) ++counts[Bucket(token)];
  const double cache_denom =
      static_cast<double>(ctx.size()) +
      beta_ * static_cast<double>(background_.size());
  std::vector<double> dist(background_.size());
  for (std::size_t b = 0; b < dist.size(); ++b) {
    dist[b] = (1.0 - alpha_) * background_[b] +
              alpha_ * (static_cast<double>(counts[b]) + beta_) / cache_denom;
  }
  return dist;
}

double CacheScorer::ConditionalLogProb(std::string_view context,
                                       std::string_view output) const {
  const TokenSeq out = Tokenize(output);
  if (out.empty()) {
    throw Error(ErrorCode::kInvalidOutput, "output has no tokens");
  }
  const TokenSeq ctx = Tokenize(context);
  BucketCounts counts;
  for (const std::string& token : ctx) ++counts[Bucket(token)];
  const double cache_denom =
      static_cast<double>(ctx.size()) +
      beta_ * static_cast<double>(background_.size());
  double log_prob = 0.0;
  for (const std::string& token : out) {
    const std::size_t b = Bucket(token);
    const auto it = counts.find(b);
    const double in_context =
        it == counts.end() ? 0.0 : static_cast<double>(it->second);
    const double p = (1.0 - alpha_) * background_[b] +
                     alpha_ * (in_context + beta_) / cache_denom;
    log_prob += std::log(p);
  }
  return log_prob;
}

std::vector<double> CacheScorer::LogProbs(
    std::span<const LikelihoodQuery> queries) const {
  std::vector<double> out;
  out.reserve(queries.size());
  for (const LikelihoodQuery& q : queries) {
    out.push_back(ConditionalLogProb(q.context, q.output));
  }
  return out;
}

std::string ChunkWithMention(std::string_view chunk, std::string_view mention) {
  std::string joined;
  joined.reserve(chunk.size() + 1 + mention.size());
  joined.append(chunk);
  joined.push_back(' ');
  joined.append(mention);
  return joined;
}

double RelevanceRatio(const LikelihoodModel& model, const Chunk& chunk,
                      std::string_view mention, std::string_view output) {
  return std::exp(
      ScoreChunkLogRatios(model, std::span(&chunk, 1), mention, output)
          .front());
}

std::vector<double> ScoreChunkLogRatios(const LikelihoodModel& model,
                                        std::span<const Chunk> chunks,
                                        std::string_view mention,
                                        std::string_view output) {
  if (Tokenize(output).empty()) {
    throw Error(ErrorCode::kInvalidOutput, "output has no tokens");
  }
  if (chunks.empty()) return {};
  std::vector<LikelihoodQuery> queries;
  queries.reserve(chunks.size() + 1);
  queries.push_back({std::string(mention), std::string(output)});
  for (const Chunk& chunk : chunks) {
    queries.push_back({ChunkWithMention(chunk.text, mention),
                       std::string(output)});
  }
  const std::vector<double> log_probs = model.LogProbs(queries);
  if (log_probs.size() != queries.size()) {
    throw Error(ErrorCode::kMalformedResponse,
                "likelihood model returned a misaligned batch");
  }
  std::vector<double> log_ratios;
  log_ratios.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    log_ratios.push_back(log_probs[i + 1] - log_probs[0]);
  }
  return log_ratios;
}

FilterResult ApplyThreshold(std::span<const Chunk> chunks,
                            std::span<const double> log_ratios,
                            double lambda) {
  if (!(lambda >= 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "lambda must be >= 0");
  }
  FilterResult result;
  result.paragraph.lambda_used = lambda;
  std::vector<Chunk> kept;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    ScoredChunk sc;
    sc.chunk = chunks[i];
    sc.log_ratio = log_ratios[i];
    sc.ratio = std::exp(log_ratios[i]);
    sc.kept = sc.ratio >= lambda;
    if (sc.kept) {
      result.paragraph.kept_indices.push_back(chunks[i].index);
      kept.push_back(chunks[i]);
    }
    result.scored.push_back(std::move(sc));
  }
  result.paragraph.text = JoinChunks(kept);
  result.paragraph.all_filtered = !chunks.empty() && kept.empty();
  return result;
}

FilterResult FilterParagraph(const LikelihoodModel& model,
                             std::span<const std::string> paragraphs,
                             std::string_view mention, std::string_view output,
                             double lambda) {
  if (!(lambda >= 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "lambda must be >= 0");
  }
  const std::vector<Chunk> chunks = SplitChunks(paragraphs);
  const std::vector<double> log_ratios =
      ScoreChunkLogRatios(model, chunks, mention, output);
  return ApplyThreshold(chunks, log_ratios, lambda);
}

nlohmann::ordered_json ScoredChunkToJson(std::string_view record_id,
                                         const ScoredChunk& scored,
                                         double lambda) {
  nlohmann::ordered_json j;
  j["record_id"] = record_id;
  j["chunk_index"] = scored.chunk.index;
  j["ratio"] = scored.ratio;
  j["kept"] = scored.kept;
  j["lambda"] = lambda;
  return j;
}

}  // namespace figcap
