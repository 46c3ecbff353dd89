#include "mvforge/metrics.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <set>
#include <unordered_map>

#include "mvforge/digest.h"
#include "mvforge/error.h"
#include "mvforge/parallel.h"

namespace mvforge {
namespace {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramCounts count_ngrams(const TokenSeq& tokens, int n) {
  NgramCounts counts;
  const auto len = static_cast<std::size_t>(n);
  if (tokens.size() < len) return counts;
  for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < len; ++k) {
      key += tokens[i + k];
      key += '\x1f';
    }
    ++counts[key];
  }
  return counts;
}

double sorted_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

TokenSeq tokenize(std::string_view text) {
  TokenSeq out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  flush();
  return out;
}

double bleu(const std::vector<TokenSeq>& candidates, const std::vector<TokenSeq>& references, int max_n) {
  if (candidates.empty()) throw ArgumentError("BLEU needs a nonempty corpus");
  if (candidates.size() != references.size()) throw ArgumentError("BLEU candidate/reference count mismatch");
  if (max_n < 1 || max_n > 4) throw ArgumentError("BLEU max_n must be in 1..4");

  std::size_t cand_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    cand_len += candidates[i].size();
    ref_len += references[i].size();
  }
  if (cand_len == 0) return 0.0;

  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    std::size_t matched = 0, total = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const NgramCounts cand = count_ngrams(candidates[i], n);
      const NgramCounts ref = count_ngrams(references[i], n);
      for (const auto& [gram, count] : cand) {
        total += count;
        const auto it = ref.find(gram);
        if (it != ref.end()) matched += std::min(count, it->second);
      }
    }
    if (matched == 0 || total == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched) / static_cast<double>(total));
  }
  const double bp = cand_len < ref_len ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len)) : 1.0;
  return 100.0 * bp * std::exp(log_sum / max_n);
}

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PrfScore rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
  if (candidate.empty() || reference.empty()) return {};
  const auto l = static_cast<double>(lcs_length(candidate, reference));
  const double p = 100.0 * l / static_cast<double>(candidate.size());
  const double r = 100.0 * l / static_cast<double>(reference.size());
  return {p, r, harmonic(p, r)};
}

std::vector<std::vector<double>> Embedder::similarity(const TokenSeq& candidate, const TokenSeq& reference) const {
  const auto ce = embed(candidate);
  const auto re = embed(reference);
  std::vector<std::vector<double>> sim(ce.size(), std::vector<double>(re.size(), 0.0));
  for (std::size_t i = 0; i < ce.size(); ++i)
    for (std::size_t j = 0; j < re.size(); ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < ce[i].size(); ++k) dot += static_cast<double>(ce[i][k]) * static_cast<double>(re[j][k]);
      sim[i][j] = std::clamp(dot, -1.0, 1.0);
    }
  return sim;
}

OneHotEmbedder::OneHotEmbedder(std::vector<std::string> vocabulary) {
  std::sort(vocabulary.begin(), vocabulary.end());
  vocabulary.erase(std::unique(vocabulary.begin(), vocabulary.end()), vocabulary.end());
  for (std::size_t i = 0; i < vocabulary.size(); ++i) index_.emplace(vocabulary[i], i);
}

OneHotEmbedder OneHotEmbedder::from_texts(const std::vector<std::string>& texts) {
  std::vector<std::string> vocab;
  for (const std::string& t : texts)
    for (std::string& tok : tokenize(t)) vocab.push_back(std::move(tok));
  return OneHotEmbedder(std::move(vocab));
}

std::size_t OneHotEmbedder::axis(const std::string& token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) throw ArgumentError("token outside one-hot vocabulary: " + token);
  return it->second;
}

std::vector<Embedding> OneHotEmbedder::embed(const TokenSeq& tokens) const {
  std::vector<Embedding> out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) {
    Embedding e(index_.size(), 0.0f);
    e[axis(t)] = 1.0f;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::vector<double>> OneHotEmbedder::similarity(const TokenSeq& candidate, const TokenSeq& reference) const {
  std::vector<std::size_t> ca, ra;
  for (const std::string& t : candidate) ca.push_back(axis(t));
  for (const std::string& t : reference) ra.push_back(axis(t));
  std::vector<std::vector<double>> sim(ca.size(), std::vector<double>(ra.size(), 0.0));
  for (std::size_t i = 0; i < ca.size(); ++i)
    for (std::size_t j = 0; j < ra.size(); ++j) sim[i][j] = ca[i] == ra[j] ? 1.0 : 0.0;
  return sim;
}

std::string HashedEmbedder::id() const { return "hashed:" + std::to_string(dim_) + ":" + std::to_string(seed_); }

std::vector<Embedding> HashedEmbedder::embed(const TokenSeq& tokens) const {
  if (dim_ == 0) throw ArgumentError("embedding dimension must be > 0");
  std::vector<Embedding> out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) {
    const std::string h = Sha256Builder().field(std::to_string(seed_)).field(t).hex();
    std::mt19937_64 rng(std::stoull(h.substr(0, 16), nullptr, 16));
    std::normal_distribution<double> gauss;
    std::vector<double> v(dim_);
    double norm = 0.0;
    for (double& x : v) {
      x = gauss(rng);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    Embedding e(dim_);
    for (std::size_t k = 0; k < dim_; ++k) e[k] = static_cast<float>(v[k] / norm);
    out.push_back(std::move(e));
  }
  return out;
}

PrfScore bert_score(const TokenSeq& candidate, const TokenSeq& reference, const Embedder& embedder) {
  if (candidate.empty() || reference.empty()) throw ArgumentError("BERTScore needs nonempty candidate and reference");
  const auto sim = embedder.similarity(candidate, reference);
  std::vector<double> best_c(candidate.size(), -1.0), best_r(reference.size(), -1.0);
  for (std::size_t i = 0; i < candidate.size(); ++i)
    for (std::size_t j = 0; j < reference.size(); ++j) {
      best_c[i] = std::max(best_c[i], sim[i][j]);
      best_r[j] = std::max(best_r[j], sim[i][j]);
    }
  const double p = 100.0 * sorted_sum(best_c) / static_cast<double>(candidate.size());
  const double r = 100.0 * sorted_sum(best_r) / static_cast<double>(reference.size());
  return {p, r, harmonic(p, r)};
}

std::array<double, 8> MetricReport::values() const {
  return {bleu1, bleu4, rouge_p, rouge_r, rouge_f1, bert_p, bert_r, bert_f1};
}

MetricReport MetricReport::from_values(const std::array<double, 8>& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
}

MetricReport MetricReport::rounded() const {
  std::array<double, 8> v = values();
  for (double& x : v) x = round_half_up(x, 1);
  return from_values(v);
}

double round_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // Scaled values within 1e-9 of a half step count as the half step, so
  // 0.15 (stored as 0.1499999...) still rounds up.
  return std::floor(value * scale + 0.5 + 1e-9) / scale;
}

MetricReport evaluate_pairs(const std::vector<std::pair<std::string, std::string>>& pairs, const Embedder& embedder,
                            std::size_t jobs) {
  if (pairs.empty()) throw ArgumentError("no pairs to evaluate");
  std::vector<TokenSeq> cands(pairs.size()), refs(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    cands[i] = tokenize(pairs[i].first);
    refs[i] = tokenize(pairs[i].second);
  }

  MetricReport report;
  report.bleu1 = bleu(cands, refs, 1);
  report.bleu4 = bleu(cands, refs, 4);

  struct PairScores {
    PrfScore rouge, bert;
  };
  const auto scores = parallel_map(pairs.size(), jobs, [&](std::size_t i) {
    PairScores s;
    s.rouge = rouge_l(cands[i], refs[i]);
    try {
      s.bert = bert_score(cands[i], refs[i], embedder);
    } catch (const ArgumentError& e) {
      throw ArgumentError("pair " + std::to_string(i) + ": " + e.what());
    }
    return s;
  });

  std::array<std::vector<double>, 6> cols;
  for (const PairScores& s : scores) {
    cols[0].push_back(s.rouge.precision);
    cols[1].push_back(s.rouge.recall);
    cols[2].push_back(s.rouge.f1);
    cols[3].push_back(s.bert.precision);
    cols[4].push_back(s.bert.recall);
    cols[5].push_back(s.bert.f1);
  }
  const auto n = static_cast<double>(pairs.size());
  report.rouge_p = sorted_sum(cols[0]) / n;
  report.rouge_r = sorted_sum(cols[1]) / n;
  report.rouge_f1 = sorted_sum(cols[2]) / n;
  report.bert_p = sorted_sum(cols[3]) / n;
  report.bert_r = sorted_sum(cols[4]) / n;
  report.bert_f1 = sorted_sum(cols[5]) / n;
  return report;
}

}  // namespace mvforge
