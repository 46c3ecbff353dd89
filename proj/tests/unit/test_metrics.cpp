#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "mvforge/error.h"
#include "mvforge/metrics.h"
#include "oracles.h"

using namespace mvforge;

namespace {

TokenSeq random_tokens(std::mt19937& rng, std::size_t max_len, int symbols, std::size_t min_len = 0) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<int> sym(0, symbols - 1);
  TokenSeq out(len(rng));
  for (auto& t : out) t = std::string(1, static_cast<char>('a' + sym(rng)));
  return out;
}

}  // namespace

TEST(Tokenize, LowercasesAndSplitsPunctuation) {
  EXPECT_EQ(tokenize("Hello, World!"), (TokenSeq{"hello", ",", "world", "!"}));
  EXPECT_EQ(tokenize("  a\tb\nc  "), (TokenSeq{"a", "b", "c"}));
  EXPECT_EQ(tokenize("t=2.5s"), (TokenSeq{"t", "=", "2", ".", "5s"}));
  EXPECT_TRUE(tokenize("   ").empty());
}

TEST(Bleu, UnigramHandExample) {
  const double b1 = bleu({{"a", "b", "c"}}, {{"a", "b", "d"}}, 1);
  EXPECT_NEAR(b1, 200.0 / 3.0, 1e-9);
  EXPECT_EQ(round_half_up(b1), 66.7);
}

TEST(Bleu, ClipsRepeatedCandidateTokens) {
  // "the the the" against "the cat": one clipped match out of three.
  const double b1 = bleu({{"the", "the", "the"}}, {{"the", "cat"}}, 1);
  EXPECT_NEAR(b1, 100.0 / 3.0, 1e-9);
}

TEST(Bleu, BrevityPenaltyAppliesToShortCandidates) {
  const double b1 = bleu({{"a", "b"}}, {{"a", "b", "c", "d"}}, 1);
  EXPECT_NEAR(b1, 100.0 * std::exp(1.0 - 2.0), 1e-9);
}

TEST(Bleu, ZeroHigherOrderMatchGivesZero) {
  EXPECT_EQ(bleu({{"a", "b", "c", "d"}}, {{"d", "c", "b", "a"}}, 4), 0.0);
}

TEST(Bleu, RejectsBadArguments) {
  EXPECT_THROW(bleu({}, {}, 4), ArgumentError);
  EXPECT_THROW(bleu({{"a"}}, {}, 4), ArgumentError);
  EXPECT_THROW(bleu({{"a"}}, {{"a"}}, 0), ArgumentError);
  EXPECT_THROW(bleu({{"a"}}, {{"a"}}, 5), ArgumentError);
}

TEST(Bleu, MatchesCountingOracle) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<TokenSeq> c, r;
    const int pairs = 1 + trial % 4;
    for (int p = 0; p < pairs; ++p) {
      c.push_back(random_tokens(rng, 9, 3, 1));
      r.push_back(random_tokens(rng, 9, 3, 1));
    }
    for (int n : {1, 2, 4}) ASSERT_NEAR(bleu(c, r, n), oracle::bleu_by_counting(c, r, n), 1e-9) << trial;
  }
}

TEST(RougeL, HandExample) {
  const PrfScore s = rouge_l({"a", "b", "c", "d"}, {"a", "c", "d"});
  EXPECT_DOUBLE_EQ(s.precision, 75.0);
  EXPECT_DOUBLE_EQ(s.recall, 100.0);
  EXPECT_NEAR(s.f1, 600.0 / 7.0, 1e-9);
  EXPECT_EQ(round_half_up(s.f1), 85.7);
}

TEST(RougeL, EmptySideScoresZero) {
  EXPECT_EQ(rouge_l({}, {"a"}), PrfScore{});
  EXPECT_EQ(rouge_l({"a"}, {}), PrfScore{});
}

TEST(RougeL, LcsMatchesEnumeration) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const TokenSeq a = random_tokens(rng, 8, 4), b = random_tokens(rng, 8, 4);
    ASSERT_EQ(lcs_length(a, b), oracle::lcs_by_enumeration(a, b));
    ASSERT_EQ(lcs_length(a, b), lcs_length(b, a));
  }
}

TEST(BertScore, OneHotHandExample) {
  const auto emb = OneHotEmbedder::from_texts({"a b", "a c"});
  const PrfScore s = bert_score({"a", "b"}, {"a", "c"}, emb);
  EXPECT_DOUBLE_EQ(s.precision, 50.0);
  EXPECT_DOUBLE_EQ(s.recall, 50.0);
  EXPECT_DOUBLE_EQ(s.f1, 50.0);
}

TEST(BertScore, OneHotMatchesCountingOracle) {
  std::mt19937 rng(3);
  const auto emb = OneHotEmbedder({"a", "b", "c", "d", "e"});
  for (int trial = 0; trial < 500; ++trial) {
    const TokenSeq c = random_tokens(rng, 7, 5, 1), r = random_tokens(rng, 7, 5, 1);
    const PrfScore s = bert_score(c, r, emb);
    const oracle::Prf o = oracle::bertscore_onehot_by_counting(c, r);
    ASSERT_NEAR(s.precision, o.p, 1e-9);
    ASSERT_NEAR(s.recall, o.r, 1e-9);
    ASSERT_NEAR(s.f1, o.f, 1e-9);
  }
}

TEST(BertScore, RejectsEmptySides) {
  const HashedEmbedder emb;
  EXPECT_THROW(bert_score({}, {"a"}, emb), ArgumentError);
  EXPECT_THROW(bert_score({"a"}, {}, emb), ArgumentError);
}

TEST(OneHotEmbedder, UnknownTokenThrows) {
  const OneHotEmbedder emb({"a"});
  EXPECT_THROW(emb.embed({"zzz"}), ArgumentError);
}

TEST(HashedEmbedder, UnitNormAndDeterministic) {
  const HashedEmbedder emb(32, 9);
  const auto v = emb.embed({"music", "video", "music"});
  ASSERT_EQ(v.size(), 3u);
  double norm = 0.0;
  for (float x : v[0]) norm += static_cast<double>(x) * x;
  EXPECT_NEAR(norm, 1.0, 1e-5);
  EXPECT_EQ(v[0], v[2]);
  EXPECT_NE(v[0], v[1]);
  EXPECT_EQ(HashedEmbedder(32, 9).embed({"music"})[0], v[0]);
  EXPECT_NE(HashedEmbedder(32, 10).embed({"music"})[0], v[0]);
  EXPECT_EQ(emb.id(), "hashed:32:9");
}

TEST(HashedEmbedder, IdenticalTextsScoreFullMarks) {
  const HashedEmbedder emb;
  const PrfScore s = bert_score(tokenize("a slow pan over the sea"), tokenize("a slow pan over the sea"), emb);
  EXPECT_NEAR(s.f1, 100.0, 1e-4);
}

TEST(RoundHalfUp, Boundaries) {
  EXPECT_EQ(round_half_up(0.05), 0.1);
  EXPECT_EQ(round_half_up(0.15), 0.2);
  EXPECT_EQ(round_half_up(85.749999), 85.7);
  EXPECT_EQ(round_half_up(100.0), 100.0);
  EXPECT_EQ(round_half_up(2.345, 2), 2.35);
}

TEST(EvaluatePairs, IdentityScoresHundred) {
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"Overview: a calm sea.", "Overview: a calm sea."}, {"x y z", "x y z"}, {"one two three four", "one two three four"}};
  const MetricReport r = evaluate_pairs(pairs, HashedEmbedder()).rounded();
  for (double v : r.values()) EXPECT_EQ(v, 100.0);
}

TEST(EvaluatePairs, InvariantUnderPairOrderAndJobs) {
  std::mt19937 rng(21);
  std::vector<std::pair<std::string, std::string>> pairs;
  const std::vector<std::string> words = {"sun", "rain", "dance", "city", "night", "crowd", "slow", "fast"};
  auto sentence = [&] {
    std::string s;
    const int n = 3 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) s += words[rng() % words.size()] + " ";
    return s;
  };
  for (int i = 0; i < 40; ++i) pairs.emplace_back(sentence(), sentence());
  const HashedEmbedder emb(16, 1);
  const MetricReport base = evaluate_pairs(pairs, emb, 1);
  auto shuffled = pairs;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const MetricReport again = evaluate_pairs(shuffled, emb, 8);
  // BLEU pools integer counts, the means use sorted sums: bit-identical.
  EXPECT_EQ(base, again);
}

TEST(EvaluatePairs, EmptyPredictionNamesThePair) {
  try {
    evaluate_pairs({{"a b", "a b"}, {"", "a"}}, HashedEmbedder());
    FAIL();
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("pair 1"), std::string::npos);
  }
}

TEST(MetricReport, ValuesRoundTrip) {
  const std::array<double, 8> v = {1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_EQ(MetricReport::from_values(v).values(), v);
}
