#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mvforge {

using TokenSeq = std::vector<std::string>;

inline constexpr std::string_view kTokenizerVersion = "ws-punct/v1";

// ASCII-lowercase, split on whitespace, every ASCII punctuation character
// becomes its own token. Non-ASCII bytes are kept as-is.
TokenSeq tokenize(std::string_view text);

// Corpus BLEU in percent: clipped n-gram counts pooled over all pairs,
// geometric mean over n = 1..max_n, brevity penalty exp(1 - r/c) when c < r.
// No smoothing. Throws ArgumentError on an empty corpus, unequal lengths or
// max_n outside 1..4.
double bleu(const std::vector<TokenSeq>& candidates, const std::vector<TokenSeq>& references,
            int max_n);

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const PrfScore&) const = default;
};

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b);

// ROUGE-L in percent. An empty side scores 0 everywhere.
PrfScore rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

using Embedding = std::vector<float>;

// Token embedder for BERTScore. Vectors are unit norm with a fixed
// dimension; equal inputs give equal outputs.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string id() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<Embedding> embed(const TokenSeq& tokens) const = 0;

  // Cosine similarity matrix [candidate][reference]. The default embeds both
  // sides and takes dot products; subclasses may shortcut.
  virtual std::vector<std::vector<double>> similarity(const TokenSeq& candidate,
                                                      const TokenSeq& reference) const;
};

// One axis per vocabulary entry. Similarity is exact token match.
class OneHotEmbedder : public Embedder {
 public:
  explicit OneHotEmbedder(std::vector<std::string> vocabulary);
  static OneHotEmbedder from_texts(const std::vector<std::string>& texts);

  std::string id() const override { return "onehot"; }
  std::size_t dimension() const override { return index_.size(); }
  std::vector<Embedding> embed(const TokenSeq& tokens) const override;
  std::vector<std::vector<double>> similarity(const TokenSeq& candidate,
                                              const TokenSeq& reference) const override;

 private:
  std::size_t axis(const std::string& token) const;
  std::map<std::string, std::size_t> index_;
};

// Per-token Gaussian vectors seeded from a hash of the token.
class HashedEmbedder : public Embedder {
 public:
  explicit HashedEmbedder(std::size_t dimension = 64, std::uint64_t seed = 0)
      : dim_(dimension), seed_(seed) {}

  std::string id() const override;
  std::size_t dimension() const override { return dim_; }
  std::vector<Embedding> embed(const TokenSeq& tokens) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

struct HttpEmbedderConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "text-embedding-3-small";
  std::string api_key;
  double timeout_s = 60.0;
};

// Token vectors from an `/embeddings` endpoint, memoized per token. The
// dimension is whatever the endpoint returns; 0 until the first call.
class HttpEmbedder : public Embedder {
 public:
  explicit HttpEmbedder(HttpEmbedderConfig config);

  std::string id() const override;
  std::size_t dimension() const override;
  std::vector<Embedding> embed(const TokenSeq& tokens) const override;

 private:
  HttpEmbedderConfig config_;
  mutable std::mutex mu_;
  mutable std::map<std::string, Embedding> memo_;
  mutable std::size_t dim_ = 0;
};

// BERTScore greedy matching in percent, no IDF weighting, no baseline
// rescaling. Throws ArgumentError when either side is empty.
PrfScore bert_score(const TokenSeq& candidate, const TokenSeq& reference, const Embedder& embedder);

struct MetricReport {
  double bleu1 = 0.0;
  double bleu4 = 0.0;
  double rouge_p = 0.0;
  double rouge_r = 0.0;
  double rouge_f1 = 0.0;
  double bert_p = 0.0;
  double bert_r = 0.0;
  double bert_f1 = 0.0;

  std::array<double, 8> values() const;
  static MetricReport from_values(const std::array<double, 8>& v);
  // Every column rounded half-up to one decimal.
  MetricReport rounded() const;

  bool operator==(const MetricReport&) const = default;
};

inline constexpr std::array<std::string_view, 8> kMetricColumns = {
    "BLEU-1", "BLEU", "ROUGE-P", "ROUGE-R", "ROUGE-F1", "BERT-P", "BERT-R", "BERT-F1"};

double round_half_up(double value, int decimals = 1);

// All eight columns. BLEU is corpus level; ROUGE-L and BERTScore are means
// over pairs, summed in sorted order so the result does not depend on pair
// order or thread count.
MetricReport evaluate_pairs(const std::vector<std::pair<std::string, std::string>>& pairs,
                            const Embedder& embedder, std::size_t jobs = 1);

}  // namespace mvforge
