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

#ifndef FIGCAP_METRICS_H_
#define FIGCAP_METRICS_H_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "figcap/textkit.h"
#include "json.hpp"

namespace figcap {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const RougeScore&) const = default;
};

struct MetricReport {
  double bleu4 = 0.0;
  RougeScore rouge1;
  RougeScore rouge2;
  double rouge1_norm = 0.0;
  double rouge2_norm = 0.0;

  bool operator==(const MetricReport&) const = default;
};

// Size of the clipped multiset intersection of two bags of the same order.
std::size_t ClippedOverlap(const NGramBag& a, const NGramBag& b);

// ROUGE-N with clipped overlap; zero denominators yield zero components.
RougeScore RougeN(std::span<const std::string> candidate,
                  std::span<const std::string> reference, int n);

// Length-normalized ROUGE-N recall: 10 * recall / ln(1 + |reference|), or 0
// for an empty reference.
double RougeNNormalized(std::span<const std::string> candidate,
                        std::span<const std::string> reference, int n);

// Maps a ROUGE-N recall onto the normalized scale for a reference of
// `reference_length` tokens.
double NormalizeRecall(double recall, std::size_t reference_length);

// Sentence BLEU-4 against a single reference. Zero modified precisions are
// replaced by 1 / (2 * max(1, number of candidate n-grams of that order));
// the brevity penalty applies when the candidate is shorter than the
// reference.
double Bleu4(std::span<const std::string> candidate,
             std::span<const std::string> reference);

MetricReport EvaluatePair(std::span<const std::string> candidate,
                          std::span<const std::string> reference);

using TokenPair = std::pair<TokenSeq, TokenSeq>;  // (candidate, reference)

// Arithmetic mean of per-pair reports. Throws kEmptyCorpus on no pairs.
MetricReport EvaluateCorpus(std::span<const TokenPair> pairs);

// Mean of already computed reports. Throws kEmptyCorpus on no reports.
MetricReport MeanReport(std::span<const MetricReport> reports);

// Flat object: bleu4, rouge1_p, rouge1_r, rouge1_f, rouge2_p, rouge2_r,
// rouge2_f, rouge1_norm, rouge2_norm.
nlohmann::ordered_json ToJson(const MetricReport& report);
MetricReport MetricReportFromJson(const nlohmann::json& json);

}  // namespace figcap

#endif  // FIGCAP_METRICS_H_
