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

// Acceptance gate. Runs every release criterion at its stated tolerance and
// runtime budget, printing one PASS/FAIL line per criterion. Exit status is
// non-zero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "figcap/ensemble.h"
#include "figcap/filter.h"
#include "figcap/jsonl.h"
#include "figcap/metrics.h"
#include "figcap/pipeline.h"
#include "figcap/textkit.h"
#include "support/synthetic.h"

namespace figcap::acceptance {
namespace {

namespace fs = std::filesystem;
using testing::Rng;

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Records the first failure and keeps counting the rest.
class Check {
 public:
  void Expect(bool condition, const std::string& what) {
    if (condition) return;
    ++failures_;
    if (first_.empty()) first_ = what;
  }
  Outcome Finish(const std::string& summary) const {
    if (failures_ == 0) return {true, summary};
    return {false, std::to_string(failures_) + " failure(s); first: " + first_};
  }

 private:
  int failures_ = 0;
  std::string first_;
};

// ---- Independent oracles -------------------------------------------------

// Clipped overlap by greedy window matching; no hashing or maps.
double OracleOverlap(const TokenSeq& a, const TokenSeq& b, std::size_t n) {
  if (a.size() < n || b.size() < n) return 0;
  std::vector<bool> used(b.size() - n + 1, false);
  double overlap = 0;
  for (std::size_t i = 0; i + n <= a.size(); ++i) {
    for (std::size_t j = 0; j + n <= b.size(); ++j) {
      if (used[j]) continue;
      if (std::equal(a.begin() + i, a.begin() + i + n, b.begin() + j)) {
        used[j] = true;
        ++overlap;
        break;
      }
    }
  }
  return overlap;
}

double Windows(const TokenSeq& s, std::size_t n) {
  return s.size() >= n ? static_cast<double>(s.size() - n + 1) : 0.0;
}

double OracleNormalizedRecall(const TokenSeq& cand, const TokenSeq& ref,
                              std::size_t n) {
  if (ref.empty()) return 0.0;
  const double total = Windows(ref, n);
  const double recall = total > 0 ? OracleOverlap(cand, ref, n) / total : 0.0;
  return 10.0 * recall / std::log(1.0 + static_cast<double>(ref.size()));
}

std::vector<double> OracleConsensus(const std::vector<TokenSeq>& texts) {
  std::vector<double> scores(texts.size(), 0.0);
  for (std::size_t n = 0; n < texts.size(); ++n) {
    double sum = 0;
    for (std::size_t m = 0; m < texts.size(); ++m) {
      if (m != n) sum += OracleNormalizedRecall(texts[n], texts[m], 2);
    }
    scores[n] = sum / static_cast<double>(texts.size() - 1);
  }
  return scores;
}

std::vector<std::string> RandomWords(Rng& rng, const std::vector<std::string>& vocab,
                                     std::size_t min, std::size_t max) {
  std::vector<std::string> out;
  const std::size_t len = rng.Between(min, max);
  for (std::size_t i = 0; i < len; ++i) out.push_back(vocab[rng.Below(vocab.size())]);
  return out;
}

// ---- Criteria --------------------------------------------------------------

Outcome MetricIdentities() {
  Check check;
  Rng rng(1001);
  const auto vocab = testing::MakeVocabulary(15, 1001);
  for (int trial = 0; trial < 200; ++trial) {
    const TokenSeq x = RandomWords(rng, vocab, 4, 40);
    const TokenSeq y = RandomWords(rng, vocab, 4, 40);
    for (int n : {1, 2}) {
      check.Expect(RougeN(x, x, n).f1 == 1.0, "rouge self f1 != 1");
      check.Expect(std::abs(RougeN(x, y, n).precision -
                            RougeN(y, x, n).recall) <= 1e-12,
                   "precision/recall duality");
    }
    check.Expect(Bleu4(x, x) == 1.0, "bleu4 self != 1");
  }
  return check.Finish("200 sequences, lengths 4-40");
}

Outcome MetricOracle() {
  Check check;
  const auto near = [&](double got, double want, const std::string& what) {
    check.Expect(std::abs(got - want) <= 1e-9,
                 what + " got " + std::to_string(got));
  };
  const TokenSeq abc = {"a", "b", "c"};
  const TokenSeq abd = {"a", "b", "d"};
  const RougeScore r1 = RougeN(abc, abd, 1);
  near(r1.precision, 2.0 / 3.0, "rouge1 p");
  near(r1.recall, 2.0 / 3.0, "rouge1 r");
  near(r1.f1, 2.0 / 3.0, "rouge1 f1");
  const RougeScore r2 = RougeN(TokenSeq{"x"}, TokenSeq{"a", "b"}, 2);
  near(r2.precision + r2.recall + r2.f1, 0.0, "rouge2 no bigrams");
  // "a b c" vs "a b d": bigrams {ab, bc} vs {ab, bd} -> 1/2 each.
  const RougeScore r2b = RougeN(abc, abd, 2);
  near(r2b.precision, 0.5, "rouge2 p");
  near(r2b.recall, 0.5, "rouge2 r");
  const TokenSeq six = {"a", "b", "c", "d", "e", "f"};
  near(RougeNNormalized(six, six, 1), 10.0 / std::log(7.0), "rouge1_norm six");
  near(RougeNNormalized(abc, abd, 1), 10.0 * (2.0 / 3.0) / std::log(4.0),
       "rouge1_norm abc");
  near(RougeNNormalized(TokenSeq{}, abd, 1), 0.0, "rouge1_norm empty");

  const TokenSeq ref = {"a", "b", "c", "d", "e", "f", "g", "h"};
  TokenSeq cand = ref;
  cand.back() = "z";
  near(Bleu4(ref, ref), 1.0, "bleu4 identical");
  near(Bleu4(TokenSeq{}, ref), 0.0, "bleu4 empty");
  near(Bleu4(cand, ref),
       std::pow((7.0 / 8.0) * (6.0 / 7.0) * (5.0 / 6.0) * (4.0 / 5.0), 0.25),
       "bleu4 last token changed");
  return check.Finish("pinned rouge/bleu examples at 1e-9");
}

Outcome MbrEquivalence() {
  Check check;
  Rng rng(2002);
  const auto vocab = testing::MakeVocabulary(10, 2002);
  for (int trial = 0; trial < 100; ++trial) {
    CandidatePool pool;
    pool.record_id = "p" + std::to_string(trial);
    std::vector<TokenSeq> texts;
    const std::size_t n = rng.Between(2, 20);
    for (std::size_t i = 0; i < n; ++i) {
      const TokenSeq words = RandomWords(rng, vocab, 1, 10);
      texts.push_back(words);
      pool.candidates.push_back({Join(words), "m", 0, static_cast<int>(i)});
    }
    const std::vector<double> oracle = OracleConsensus(texts);
    const std::vector<double> scores = ConsensusScores(pool);
    for (std::size_t i = 0; i < n; ++i) {
      check.Expect(std::abs(scores[i] - oracle[i]) <= 1e-12,
                   "score mismatch in " + pool.record_id);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (oracle[i] > oracle[best]) best = i;
    }
    check.Expect(SelectCaption(pool).winner_index == best,
                 "argmax mismatch in " + pool.record_id);
  }
  return check.Finish("100 pools of size 2-20 at 1e-12");
}

Outcome DuplicateDominance() {
  Check check;
  Rng rng(3003);
  for (int trial = 0; trial < 100; ++trial) {
    // Every text draws from its own word namespace, so no bigram is shared
    // between distinct texts.
    const auto text_for = [&](int id) {
      std::string out;
      const std::size_t len = rng.Between(1, 8);
      for (std::size_t i = 0; i < len; ++i) {
        if (i > 0) out += ' ';
        out += "t" + std::to_string(id) + "w" + std::to_string(rng.Below(5));
      }
      return out;
    };
    std::string dup = text_for(0);
    while (Tokenize(dup).size() < 2) dup = text_for(0);  // needs a bigram
    const std::size_t k = rng.Between(3, 8);
    const std::size_t others = rng.Between(0, 12);
    std::vector<std::string> texts(k, dup);
    for (std::size_t i = 0; i < others; ++i) {
      texts.push_back(text_for(static_cast<int>(i) + 1));
    }
    for (std::size_t i = texts.size() - 1; i > 0; --i) {
      std::swap(texts[i], texts[rng.Below(i + 1)]);
    }
    CandidatePool pool;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      pool.candidates.push_back({texts[i], "m", 0, static_cast<int>(i)});
    }
    const ConsensusResult result = SelectCaption(pool);
    const std::size_t first_copy =
        static_cast<std::size_t>(std::find(texts.begin(), texts.end(), dup) -
                                 texts.begin());
    check.Expect(result.winner.text == dup,
                 "trial " + std::to_string(trial) + ": copy did not win");
    check.Expect(result.winner_index == first_copy,
                 "trial " + std::to_string(trial) + ": not the first copy");
  }
  return check.Finish("100 instances, k in [3, 8]");
}

Outcome FilterMonotonicity() {
  Check check;
  const auto records = testing::MakeRecords(100, 4004);
  PipelineConfig config;
  config.filter_mode = FilterMode::kOracle;
  const auto model = MakeFilterModel(config, records);
  const std::vector<double> grid = {0.0, 0.5, 1.0, 1.5, 2.0,
                                    std::numeric_limits<double>::infinity()};
  std::size_t chunks = 0;
  std::size_t kept_at_one = 0;
  for (const Record& r : records) {
    std::vector<std::size_t> previous;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const FilterResult result = FilterParagraph(
          *model, r.paragraphs, MentionText(r), *r.gold_caption, grid[g]);
      const auto& kept = result.paragraph.kept_indices;
      if (g == 0) {
        chunks += result.scored.size();
        check.Expect(kept.size() == result.scored.size(),
                     r.record_id + ": lambda 0 dropped a chunk");
      } else {
        check.Expect(std::includes(previous.begin(), previous.end(),
                                   kept.begin(), kept.end()),
                     r.record_id + ": kept set grew at lambda " +
                         std::to_string(grid[g]));
      }
      for (const ScoredChunk& sc : result.scored) {
        check.Expect(sc.kept == (sc.ratio >= grid[g]), "kept flag mismatch");
      }
      if (grid[g] == 1.0) kept_at_one += kept.size();
      previous = kept;
    }
  }
  // Guard against a vacuous pass where the threshold never bites.
  check.Expect(kept_at_one > 0 && kept_at_one < chunks,
               "lambda 1 should keep some but not all chunks");
  return check.Finish("100 records, " + std::to_string(chunks) +
                      " chunks, " + std::to_string(kept_at_one) +
                      " kept at lambda 1");
}

Outcome ContextFreeNeutrality() {
  Check check;
  const auto records = testing::MakeRecords(50, 5005);
  std::vector<TokenSeq> corpus;
  for (const Record& r : records) {
    for (const auto& p : r.paragraphs) corpus.push_back(Tokenize(p));
  }
  const CacheScorer scorer = CacheScorer::Fit(corpus, 0.0, 1.0, 1.0);
  std::size_t count = 0;
  for (const Record& r : records) {
    const FilterResult result = FilterParagraph(
        scorer, r.paragraphs, MentionText(r), *r.gold_caption, 1.0);
    for (const ScoredChunk& sc : result.scored) {
      ++count;
      check.Expect(sc.ratio == 1.0, r.record_id + ": ratio != 1");
      check.Expect(sc.kept, r.record_id + ": chunk dropped at lambda 1");
    }
    const FilterResult above = FilterParagraph(
        scorer, r.paragraphs, MentionText(r), *r.gold_caption,
        std::nextafter(1.0, 2.0));
    check.Expect(above.paragraph.kept_indices.empty(),
                 r.record_id + ": chunk kept above lambda 1");
  }
  return check.Finish(std::to_string(count) + " chunks with alpha = 0");
}

Outcome ScorerNormalization() {
  Check check;
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e",
                                          "f", "g", "h", "i", "j"};
  Rng rng(6006);
  std::vector<TokenSeq> corpus;
  for (int i = 0; i < 20; ++i) corpus.push_back(RandomWords(rng, vocab, 1, 12));
  const CacheScorer scorer = CacheScorer::Fit(corpus, 0.35, 0.7, 0.5);
  check.Expect(scorer.vocab_size() == vocab.size(), "vocabulary size");
  // Contexts may include out-of-vocabulary words and may be empty.
  std::vector<std::string> pool = vocab;
  pool.push_back("oov1");
  pool.push_back("oov2");
  for (int c = 0; c < 50; ++c) {
    const std::string context = Join(RandomWords(rng, pool, 0, 15));
    const std::vector<double> dist = scorer.ConditionalDistribution(context);
    double sum = 0;
    for (double p : dist) sum += p;
    check.Expect(std::abs(sum - 1.0) <= 1e-9, "distribution sum " +
                                                  std::to_string(sum));
    // Cross-check through the log-probability path.
    double via_logs = std::exp(scorer.ConditionalLogProb(context, "zzz"));
    for (const auto& w : vocab) {
      via_logs += std::exp(scorer.ConditionalLogProb(context, w));
    }
    check.Expect(std::abs(via_logs - 1.0) <= 1e-9,
                 "log-prob path sum " + std::to_string(via_logs));
  }
  return check.Finish("10-token vocabulary, 50 contexts at 1e-9");
}

Outcome PoolStructure(const fs::path& dir) {
  Check check;
  const auto records = testing::MakeRecords(5, 7007);
  const auto files = testing::WriteCandidateFiles(
      records, testing::ReferenceLayout(), dir / "pools", 7007);
  for (const Record& r : records) {
    const CandidatePool pool = AssemblePool(r.record_id, files);
    check.Expect(pool.candidates.size() == 100,
                 r.record_id + ": " + std::to_string(pool.candidates.size()) +
                     " candidates");
    std::map<std::string, int> per_model;
    for (const Candidate& c : pool.candidates) ++per_model[c.source_model];
    check.Expect(per_model.size() == 3, "three source models");
    check.Expect(per_model["pegasus"] == 48 &&
                     per_model["pegasus-x-large"] == 48 &&
                     per_model["llama2-13b"] == 4,
                 "per-model counts 48/48/4");
  }
  return check.Finish("2x3x16 + 1x4x1 layout, 5 records");
}

int RunCommand(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome EndToEndDeterminism(const fs::path& cli, const fs::path& dir,
                            double budget_seconds) {
  Check check;
  const auto records = testing::MakeRecords(500, 8008);
  testing::WriteRecords(records, dir / "records.jsonl");
  const auto files = testing::WriteCandidateFiles(
      records, testing::ReferenceLayout(), dir / "cands", 8008);
  std::string candidates;
  for (const auto& f : files) candidates += " '" + f.string() + "'";

  std::vector<double> seconds;
  for (int threads : {1, 8}) {
    const fs::path out = dir / ("out-p" + std::to_string(threads));
    const std::string command =
        "'" + cli.string() + "' run --input '" +
        (dir / "records.jsonl").string() + "' --output '" + out.string() +
        "' --candidates" + candidates +
        " --filter-mode oracle --lambda 1.0 --template instruction"
        " --seed 7 --parallelism " +
        std::to_string(threads) + " >/dev/null";
    const auto start = std::chrono::steady_clock::now();
    const int code = RunCommand(command);
    seconds.push_back(std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count());
    check.Expect(code == 0, "run exited with " + std::to_string(code));
    check.Expect(seconds.back() < budget_seconds,
                 "run took " + std::to_string(seconds.back()) + " s");
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dir / "out-p1")) {
    const fs::path other = dir / "out-p8" / entry.path().filename();
    check.Expect(fs::exists(other), "missing " + other.string());
    if (!fs::exists(other)) continue;
    check.Expect(ReadFile(entry.path()) == ReadFile(other),
                 entry.path().filename().string() + " differs");
    ++compared;
  }
  check.Expect(compared >= 7, "expected every stage file");
  std::size_t selected = 0;
  ForEachJsonLine(dir / "out-p1" / "selected.jsonl",
                  [&](const nlohmann::json&, std::size_t) { ++selected; });
  check.Expect(selected == records.size(), "every record selected");
  std::ostringstream summary;
  summary.precision(3);
  summary << "500 records, " << compared << " files identical; runs took "
          << seconds[0] << " s / " << seconds[1] << " s";
  return check.Finish(summary.str());
}

struct Criterion {
  std::string name;
  double budget_seconds;  // wall-clock limit, inf when none is stated
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace figcap::acceptance

int main(int argc, char** argv) {
  using namespace figcap::acceptance;
  const fs::path cli = argc > 1 ? fs::path(argv[1]) : fs::path(FIGCAP_CLI_PATH);
  const fs::path dir = figcap::testing::TempDir("acceptance");
  constexpr double kNone = std::numeric_limits<double>::infinity();

  const std::vector<Criterion> criteria = {
      {"metric-identities", 1.0, MetricIdentities},
      {"metric-oracle", kNone, MetricOracle},
      {"mbr-brute-force-equivalence", 5.0, MbrEquivalence},
      {"duplicate-dominance", kNone, DuplicateDominance},
      {"filter-monotonicity", 5.0, FilterMonotonicity},
      {"context-free-neutrality", kNone, ContextFreeNeutrality},
      {"scorer-normalization", kNone, ScorerNormalization},
      {"pool-structure", kNone, [&] { return PoolStructure(dir); }},
      // The budget applies to each run; the check enforces it internally.
      {"end-to-end-determinism", kNone,
       [&] { return EndToEndDeterminism(cli, dir / "e2e", 60.0); }},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome outcome;
    const auto start = std::chrono::steady_clock::now();
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (outcome.ok && seconds >= c.budget_seconds) {
      outcome = {false, "over the " + std::to_string(c.budget_seconds) +
                            " s budget"};
    }
    if (!outcome.ok) ++failed;
    std::printf("[%s] %-30s %8.3f s  %s\n", outcome.ok ? "PASS" : "FAIL",
                c.name.c_str(), seconds, outcome.detail.c_str());
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
