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

#include "figcap/metrics.h"

#include <algorithm>
#include <cmath>

#include "figcap/error.h"

namespace figcap {
namespace {

double F1(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

}  // namespace

std::size_t ClippedOverlap(const NGramBag& a, const NGramBag& b) {
  std::size_t overlap = 0;
  auto ia = a.counts.begin();
  auto ib = b.counts.begin();
  while (ia != a.counts.end() && ib != b.counts.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      overlap += static_cast<std::size_t>(std::min(ia->second, ib->second));
      ++ia;
      ++ib;
    }
  }
  return overlap;
}

RougeScore RougeN(std::span<const std::string> candidate,
                  std::span<const std::string> reference, int n) {
  const NGramBag cand = NGrams(candidate, n);
  const NGramBag ref = NGrams(reference, n);
  const auto overlap = static_cast<double>(ClippedOverlap(cand, ref));
  const std::size_t cand_total = cand.Total();
  const std::size_t ref_total = ref.Total();
  RougeScore score;
  score.precision =
      cand_total > 0 ? overlap / static_cast<double>(cand_total) : 0.0;
  score.recall = ref_total > 0 ? overlap / static_cast<double>(ref_total) : 0.0;
  score.f1 = F1(score.precision, score.recall);
  return score;
}

double NormalizeRecall(double recall, std::size_t reference_length) {
  if (reference_length == 0) return 0.0;
  return 10.0 * recall /
         std::log(1.0 + static_cast<double>(reference_length));
}

double RougeNNormalized(std::span<const std::string> candidate,
                        std::span<const std::string> reference, int n) {
  return NormalizeRecall(RougeN(candidate, reference, n).recall,
                         reference.size());
}

double Bleu4(std::span<const std::string> candidate,
             std::span<const std::string> reference) {
  if (candidate.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= 4; ++n) {
    const NGramBag cand = NGrams(candidate, n);
    const NGramBag ref = NGrams(reference, n);
    const std::size_t matches = ClippedOverlap(cand, ref);
    const double count = static_cast<double>(cand.Total());
    const double precision =
        matches == 0 ? 1.0 / (2.0 * std::max(1.0, count))
                     : static_cast<double>(matches) / count;
    log_sum += std::log(precision);
  }
  const double cand_len = static_cast<double>(candidate.size());
  const double ref_len = static_cast<double>(reference.size());
  const double brevity =
      cand_len < ref_len ? std::exp(1.0 - ref_len / cand_len) : 1.0;
  return brevity * std::exp(log_sum / 4.0);
}

MetricReport EvaluatePair(std::span<const std::string> candidate,
                          std::span<const std::string> reference) {
  MetricReport report;
  report.bleu4 = Bleu4(candidate, reference);
  report.rouge1 = RougeN(candidate, reference, 1);
  report.rouge2 = RougeN(candidate, reference, 2);
  report.rouge1_norm = NormalizeRecall(report.rouge1.recall, reference.size());
  report.rouge2_norm = NormalizeRecall(report.rouge2.recall, reference.size());
  return report;
}

MetricReport MeanReport(std::span<const MetricReport> reports) {
  if (reports.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "cannot average an empty corpus");
  }
  MetricReport sum;
  for (const MetricReport& r : reports) {
    sum.bleu4 += r.bleu4;
    sum.rouge1.precision += r.rouge1.precision;
    sum.rouge1.recall += r.rouge1.recall;
    sum.rouge1.f1 += r.rouge1.f1;
    sum.rouge2.precision += r.rouge2.precision;
    sum.rouge2.recall += r.rouge2.recall;
    sum.rouge2.f1 += r.rouge2.f1;
    sum.rouge1_norm += r.rouge1_norm;
    sum.rouge2_norm += r.rouge2_norm;
  }
  const double n = static_cast<double>(reports.size());
  for (double* field :
       {&sum.bleu4, &sum.rouge1.precision, &sum.rouge1.recall, &sum.rouge1.f1,
        &sum.rouge2.precision, &sum.rouge2.recall, &sum.rouge2.f1,
        &sum.rouge1_norm, &sum.rouge2_norm}) {
    *field /= n;
  }
  return sum;
}

MetricReport EvaluateCorpus(std::span<const TokenPair> pairs) {
  std::vector<MetricReport> reports;
  reports.reserve(pairs.size());
  for (const auto& [candidate, reference] : pairs) {
    reports.push_back(EvaluatePair(candidate, reference));
  }
  return MeanReport(reports);
}

nlohmann::ordered_json ToJson(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["bleu4"] = report.bleu4;
  j["rouge1_p"] = report.rouge1.precision;
  j["rouge1_r"] = report.rouge1.recall;
  j["rouge1_f"] = report.rouge1.f1;
  j["rouge2_p"] = report.rouge2.precision;
  j["rouge2_r"] = report.rouge2.recall;
  j["rouge2_f"] = report.rouge2.f1;
  j["rouge1_norm"] = report.rouge1_norm;
  j["rouge2_norm"] = report.rouge2_norm;
  return j;
}

MetricReport MetricReportFromJson(const nlohmann::json& json) {
  MetricReport r;
  r.bleu4 = json.at("bleu4").get<double>();
  r.rouge1 = {json.at("rouge1_p").get<double>(),
              json.at("rouge1_r").get<double>(),
              json.at("rouge1_f").get<double>()};
  r.rouge2 = {json.at("rouge2_p").get<double>(),
              json.at("rouge2_r").get<double>(),
              json.at("rouge2_f").get<double>()};
  r.rouge1_norm = json.at("rouge1_norm").get<double>();
  r.rouge2_norm = json.at("rouge2_norm").get<double>();
  return r;
}

}  // namespace figcap
