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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "figcap/error.h"
#include "support/synthetic.h"

namespace figcap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Hand-coded evaluation of the interpolated cache formula, kept apart from
// CacheScorer's bucket bookkeeping.
struct CacheOracle {
  std::vector<TokenSeq> corpus;
  double alpha, beta, k;

  double Background(const std::string& w) const {
    std::set<std::string> vocab;
    double total = 0, count = 0;
    for (const auto& seq : corpus) {
      for (const auto& t : seq) {
        vocab.insert(t);
        ++total;
        if (t == w) ++count;
      }
    }
    return (count + k) / (total + k * (vocab.size() + 1.0));
  }

  bool InVocab(const std::string& w) const {
    for (const auto& seq : corpus) {
      if (std::find(seq.begin(), seq.end(), w) != seq.end()) return true;
    }
    return false;
  }

  double LogProb(const std::string& context, const std::string& output) const {
    std::set<std::string> vocab;
    for (const auto& seq : corpus) vocab.insert(seq.begin(), seq.end());
    const TokenSeq ctx = Tokenize(context);
    double lp = 0;
    for (const auto& w : Tokenize(output)) {
      double in_ctx = 0;
      for (const auto& c : ctx) {
        const bool same = InVocab(w) ? c == w : !InVocab(c);
        if (same) ++in_ctx;
      }
      const double cache =
          (in_ctx + beta) / (ctx.size() + beta * (vocab.size() + 1.0));
      lp += std::log((1 - alpha) * Background(w) + alpha * cache);
    }
    return lp;
  }
};

std::vector<TokenSeq> TinyCorpus() { return {{"a", "b"}, {"a"}}; }

TEST(CacheScorerTest, BackgroundFormula) {
  const auto scorer = CacheScorer::Fit(TinyCorpus(), 0.5, 1.0, 1.0);
  EXPECT_NEAR(scorer.BackgroundProb("a"), 0.5, 1e-15);
  EXPECT_NEAR(scorer.BackgroundProb("b"), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(scorer.UnknownBackgroundProb(), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(scorer.BackgroundProb("zzz"), 1.0 / 6.0, 1e-15);
  EXPECT_EQ(scorer.Vocabulary(), (std::vector<std::string>{"a", "b"}));
}

TEST(CacheScorerTest, BackgroundSumsToOne) {
  const auto records = testing::MakeRecords(20, 4);
  std::vector<TokenSeq> corpus;
  for (const auto& r : records) {
    for (const auto& p : r.paragraphs) corpus.push_back(Tokenize(p));
  }
  const auto scorer = CacheScorer::Fit(corpus, 0.3, 0.5, 0.1);
  double sum = scorer.UnknownBackgroundProb();
  for (const auto& w : scorer.Vocabulary()) {
    const double p = scorer.BackgroundProb(w);
    EXPECT_GT(p, 0.0);
    sum += p;
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(CacheScorerTest, ParameterChecks) {
  const auto corpus = TinyCorpus();
  const auto code_of = [&](double alpha, double beta, double k) {
    try {
      CacheScorer::Fit(corpus, alpha, beta, k);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;  // sentinel: no error
  };
  EXPECT_EQ(code_of(0.5, 0.0, 1.0), ErrorCode::kInvalidParameter);
  EXPECT_EQ(code_of(1.0, 1.0, 1.0), ErrorCode::kInvalidParameter);
  EXPECT_EQ(code_of(-0.1, 1.0, 1.0), ErrorCode::kInvalidParameter);
  EXPECT_EQ(code_of(0.5, 1.0, 0.0), ErrorCode::kInvalidParameter);
  EXPECT_EQ(code_of(0.0, 1.0, 1.0), ErrorCode::kIo);
  try {
    CacheScorer::Fit(std::vector<TokenSeq>{}, 0.5, 1.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCorpus);
  }
}

TEST(CacheScorerTest, HandEvaluatedConditional) {
  const auto scorer = CacheScorer::Fit(TinyCorpus(), 0.5, 1.0, 1.0);
  const double expected = std::log(0.5 * 0.5 + 0.5 * (2.0 + 1.0) / (2.0 + 3.0));
  EXPECT_NEAR(scorer.ConditionalLogProb("a a", "a"), expected, 1e-15);
  EXPECT_NEAR(expected, std::log(0.55), 1e-15);
}

TEST(CacheScorerTest, UnknownOutputIsFinite) {
  const auto scorer = CacheScorer::Fit(TinyCorpus(), 0.5, 1.0, 1.0);
  const double lp = scorer.ConditionalLogProb("a b", "never seen");
  EXPECT_TRUE(std::isfinite(lp));
  EXPECT_LT(lp, 0.0);
}

TEST(CacheScorerTest, VerbatimContextRaisesLikelihood) {
  const std::vector<TokenSeq> corpus = {{"p", "q", "r", "s", "t"}};
  const auto scorer = CacheScorer::Fit(corpus, 0.4, 1.0, 1.0);
  EXPECT_GT(scorer.ConditionalLogProb("p q r", "p q r"),
            scorer.ConditionalLogProb("", "p q r"));
}

TEST(CacheScorerTest, EmptyOutputRejected) {
  const auto scorer = CacheScorer::Fit(TinyCorpus(), 0.5, 1.0, 1.0);
  try {
    scorer.ConditionalLogProb("a", " \t ");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidOutput);
  }
}

TEST(CacheScorerTest, MatchesFormulaOracle) {
  const std::vector<TokenSeq> corpus = {{"x", "y", "z"}, {"x", "w"}, {"v"}};
  const CacheOracle oracle{corpus, 0.35, 0.7, 0.4};
  const auto scorer = CacheScorer::Fit(corpus, 0.35, 0.7, 0.4);
  testing::Rng rng(13);
  const std::vector<std::string> words = {"x", "y", "z", "w", "v", "oov", "q"};
  for (int trial = 0; trial < 100; ++trial) {
    const std::string ctx = testing::RandomText(rng, words, 0, 8);
    const std::string out = testing::RandomText(rng, words, 1, 5);
    EXPECT_NEAR(scorer.ConditionalLogProb(ctx, out), oracle.LogProb(ctx, out),
                1e-12);
  }
}

TEST(CacheScorerTest, ConditionalDistributionNormalized) {
  const std::vector<TokenSeq> corpus = {
      {"t0", "t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8", "t9"}};
  const auto scorer = CacheScorer::Fit(corpus, 0.6, 0.5, 1.0);
  testing::Rng rng(17);
  std::vector<std::string> words = corpus[0];
  words.push_back("outside");
  for (int trial = 0; trial < 50; ++trial) {
    const std::string ctx = testing::RandomText(rng, words, 0, 25);
    const auto dist = scorer.ConditionalDistribution(ctx);
    ASSERT_EQ(dist.size(), 11u);
    double sum = 0;
    for (double p : dist) sum += p;
    EXPECT_NEAR(sum, 1.0, 1e-9);
    // The distribution agrees with the per-token log probabilities.
    EXPECT_NEAR(std::log(dist[3]), scorer.ConditionalLogProb(ctx, "t3"),
                1e-12);
  }
}

TEST(RelevanceRatioTest, ContextFreeScorerGivesExactlyOne) {
  const auto scorer = CacheScorer::Fit(TinyCorpus(), 0.0, 1.0, 1.0);
  for (const std::string text : {"a b a", "zzz", "", "b."}) {
    EXPECT_EQ(RelevanceRatio(scorer, Chunk{text, 0, 0, 1}, "a", "a b"), 1.0);
  }
}

TEST(RelevanceRatioTest, OverlappingChunkScoresHigher) {
  const std::vector<TokenSeq> corpus = {{"v", "w", "x", "y", "z"}};
  const auto scorer = CacheScorer::Fit(corpus, 0.5, 1.0, 1.0);
  const Chunk related{"x y z", 0, 0, 5};
  const Chunk unrelated{"v w v", 1, 6, 11};
  const double r_related = RelevanceRatio(scorer, related, "w", "x y");
  const double r_unrelated = RelevanceRatio(scorer, unrelated, "w", "x y");
  EXPECT_GT(r_related, r_unrelated);
  const CacheOracle oracle{corpus, 0.5, 1.0, 1.0};
  EXPECT_NEAR(r_related,
              std::exp(oracle.LogProb("x y z w", "x y") -
                       oracle.LogProb("w", "x y")),
              1e-12);
}

TEST(RelevanceRatioTest, EmptyChunkIsNeutral) {
  const auto scorer = CacheScorer::Fit(TinyCorpus(), 0.5, 1.0, 1.0);
  EXPECT_EQ(RelevanceRatio(scorer, Chunk{"", 0, 0, 0}, "a b", "a"), 1.0);
}

TEST(RelevanceRatioTest, ChunkPrecedesMention) {
  EXPECT_EQ(ChunkWithMention("c text", "m text"), "c text m text");
}

// Three chunks whose ratios land above, below and above 1.
struct ToyFilter {
  std::vector<TokenSeq> corpus = {
      {"loss", "curve", "epoch", "the", "we", "train", "model", "data",
       "table", "lists", "results", "accuracy"}};
  std::vector<std::string> paragraphs = {
      "The loss curve drops. We train the model on data for long. "
      "Accuracy loss stays low."};
  std::string mention = "Figure shows the curve";
  std::string output = "loss curve";
};

TEST(FilterParagraphTest, HandComputedThreshold) {
  const ToyFilter toy;
  const auto scorer = CacheScorer::Fit(toy.corpus, 0.5, 1.0, 1.0);
  const CacheOracle oracle{toy.corpus, 0.5, 1.0, 1.0};
  const FilterResult result = FilterParagraph(scorer, toy.paragraphs,
                                              toy.mention, toy.output, 1.0);
  ASSERT_EQ(result.scored.size(), 3u);
  const double den = oracle.LogProb(toy.mention, toy.output);
  for (const auto& sc : result.scored) {
    const double expected = std::exp(
        oracle.LogProb(sc.chunk.text + " " + toy.mention, toy.output) - den);
    EXPECT_NEAR(sc.ratio, expected, 1e-12) << sc.chunk.text;
  }
  EXPECT_GT(result.scored[0].ratio, 1.0);
  EXPECT_LT(result.scored[1].ratio, 1.0);
  EXPECT_GT(result.scored[2].ratio, 1.0);
  EXPECT_EQ(result.paragraph.kept_indices, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(result.paragraph.text,
            "The loss curve drops. Accuracy loss stays low.");
  EXPECT_FALSE(result.paragraph.all_filtered);
}

TEST(FilterParagraphTest, ZeroLambdaKeepsEverything) {
  const ToyFilter toy;
  const auto scorer = CacheScorer::Fit(toy.corpus, 0.5, 1.0, 1.0);
  const auto result =
      FilterParagraph(scorer, toy.paragraphs, toy.mention, toy.output, 0.0);
  EXPECT_EQ(result.paragraph.text, ConcatenateParagraphs(toy.paragraphs));
  EXPECT_EQ(result.paragraph.kept_indices.size(), 3u);
}

TEST(FilterParagraphTest, LambdaAboveMaxKeepsNothing) {
  const ToyFilter toy;
  const auto scorer = CacheScorer::Fit(toy.corpus, 0.5, 1.0, 1.0);
  const auto all =
      FilterParagraph(scorer, toy.paragraphs, toy.mention, toy.output, 0.0);
  double max_ratio = 0;
  for (const auto& sc : all.scored) max_ratio = std::max(max_ratio, sc.ratio);
  const auto none = FilterParagraph(scorer, toy.paragraphs, toy.mention,
                                    toy.output, max_ratio + 1);
  EXPECT_EQ(none.paragraph.text, "");
  EXPECT_TRUE(none.paragraph.kept_indices.empty());
  EXPECT_TRUE(none.paragraph.all_filtered);
}

TEST(FilterParagraphTest, NestedKeptSetsOnSyntheticRecords) {
  const auto records = testing::MakeRecords(40, 8);
  std::vector<TokenSeq> corpus;
  for (const auto& r : records) {
    for (const auto& p : r.paragraphs) corpus.push_back(Tokenize(p));
    corpus.push_back(Tokenize(*r.gold_caption));
  }
  const auto scorer = CacheScorer::Fit(corpus, 0.5, 1.0, 1.0);
  for (const auto& r : records) {
    std::vector<std::size_t> previous;
    bool first = true;
    for (double lambda : {0.0, 0.5, 1.0, 1.5, 2.0, kInf}) {
      const auto result = FilterParagraph(scorer, r.paragraphs,
                                          Join(r.mentions, " "),
                                          *r.gold_caption, lambda);
      const auto& kept = result.paragraph.kept_indices;
      EXPECT_TRUE(std::is_sorted(kept.begin(), kept.end()));
      EXPECT_EQ(std::adjacent_find(kept.begin(), kept.end()), kept.end());
      for (const auto& sc : result.scored) {
        EXPECT_EQ(sc.kept, sc.ratio >= lambda);
        EXPECT_GT(sc.ratio, 0.0);
      }
      if (!first) {
        EXPECT_TRUE(std::includes(previous.begin(), previous.end(),
                                  kept.begin(), kept.end()));
      } else {
        EXPECT_EQ(kept.size(), result.scored.size());
      }
      previous = kept;
      first = false;
    }
  }
}

TEST(FilterParagraphTest, LongOutputsStayFinite) {
  const auto scorer = CacheScorer::Fit(TinyCorpus(), 0.5, 1.0, 1.0);
  std::string output;
  for (int i = 0; i < 512; ++i) output += (i % 3 == 0) ? "a " : "zz ";
  const auto result = FilterParagraph(
      scorer, std::vector<std::string>{"A b a. Zz zz. Q r."}, "a", output, 1.0);
  for (const auto& sc : result.scored) {
    EXPECT_TRUE(std::isfinite(sc.log_ratio));
    EXPECT_GT(sc.ratio, 0.0);
  }
}

TEST(FilterParagraphTest, NegativeLambdaRejected) {
  const auto scorer = CacheScorer::Fit(TinyCorpus(), 0.5, 1.0, 1.0);
  try {
    FilterParagraph(scorer, std::vector<std::string>{"A."}, "", "a", -1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidParameter);
  }
}

TEST(FilterParagraphTest, JsonlFieldOrder) {
  ScoredChunk sc;
  sc.chunk = Chunk{"A.", 3, 0, 2};
  sc.ratio = 1.25;
  sc.kept = true;
  EXPECT_EQ(ScoredChunkToJson("r1", sc, 1.0).dump(),
            R"({"record_id":"r1","chunk_index":3,"ratio":1.25,"kept":true,"lambda":1.0})");
}

}  // namespace
}  // namespace figcap
