#pragma once

// Slow, obviously-correct reference implementations. Shared by the unit and
// acceptance tests; nothing here may call into the metric code under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace mvforge::oracle {

using Tokens = std::vector<std::string>;

inline bool is_subsequence(const Tokens& sub, const Tokens& seq) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < seq.size() && j < sub.size(); ++i)
    if (seq[i] == sub[j]) ++j;
  return j == sub.size();
}

// Longest common subsequence by trying every subsequence of `a`.
// Exponential in a.size(); keep inputs short.
inline std::size_t lcs_by_enumeration(const Tokens& a, const Tokens& b) {
  std::size_t best = 0;
  const std::size_t subsets = std::size_t{1} << a.size();
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    Tokens sub;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (mask & (std::size_t{1} << i)) sub.push_back(a[i]);
    if (sub.size() > best && is_subsequence(sub, b)) best = sub.size();
  }
  return best;
}

// Occurrences in `seq` of the n-gram src[start, start + n).
inline std::size_t count_ngram(const Tokens& seq, const Tokens& src, std::size_t start, std::size_t n) {
  std::size_t c = 0;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) {
    bool same = true;
    for (std::size_t k = 0; k < n && same; ++k) same = seq[i + k] == src[start + k];
    c += same ? 1 : 0;
  }
  return c;
}

// Corpus BLEU in percent by direct counting. Each distinct candidate n-gram
// is counted once (at its first occurrence) and clipped by its count in the
// reference.
inline double bleu_by_counting(const std::vector<Tokens>& cands, const std::vector<Tokens>& refs, int max_n) {
  double c_len = 0.0, r_len = 0.0;
  std::vector<double> matched(max_n, 0.0), total(max_n, 0.0);
  for (std::size_t p = 0; p < cands.size(); ++p) {
    const Tokens& c = cands[p];
    const Tokens& r = refs[p];
    c_len += static_cast<double>(c.size());
    r_len += static_cast<double>(r.size());
    for (int n = 1; n <= max_n; ++n) {
      const auto nn = static_cast<std::size_t>(n);
      if (c.size() < nn) continue;
      total[n - 1] += static_cast<double>(c.size() - nn + 1);
      for (std::size_t i = 0; i + nn <= c.size(); ++i) {
        bool seen_before = false;
        for (std::size_t j = 0; j < i && !seen_before; ++j) {
          bool same = true;
          for (std::size_t k = 0; k < nn && same; ++k) same = c[j + k] == c[i + k];
          seen_before = same;
        }
        if (seen_before) continue;
        matched[n - 1] += static_cast<double>(std::min(count_ngram(c, c, i, nn), count_ngram(r, c, i, nn)));
      }
    }
  }
  double product = 1.0;
  for (int n = 0; n < max_n; ++n) {
    if (total[n] == 0.0 || matched[n] == 0.0) return 0.0;
    product *= matched[n] / total[n];
  }
  const double geo = std::pow(product, 1.0 / max_n);
  const double bp = c_len >= r_len ? 1.0 : std::exp(1.0 - r_len / c_len);
  return 100.0 * bp * geo;
}

struct Prf {
  double p = 0.0, r = 0.0, f = 0.0;
};

// With a one-hot embedder every similarity is 0 or 1, so greedy matching
// reduces to: a token scores 1 when it occurs anywhere on the other side.
inline Prf bertscore_onehot_by_counting(const Tokens& cand, const Tokens& ref) {
  auto covered = [](const Tokens& from, const Tokens& in) {
    std::size_t hit = 0;
    for (const auto& t : from) hit += std::find(in.begin(), in.end(), t) != in.end() ? 1 : 0;
    return 100.0 * static_cast<double>(hit) / static_cast<double>(from.size());
  };
  Prf out;
  out.p = covered(cand, ref);
  out.r = covered(ref, cand);
  out.f = out.p + out.r > 0.0 ? 2.0 * out.p * out.r / (out.p + out.r) : 0.0;
  return out;
}

}  // namespace mvforge::oracle
