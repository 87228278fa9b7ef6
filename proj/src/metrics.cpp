#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "pdpp/error.hpp"
#include "pdpp/metrics.hpp"

namespace pdpp {
namespace {

using NGram = std::vector<std::uint32_t>;

void check_lengths(std::span<const Sequence> s, std::size_t n) {
  if (n == 0) throw InvalidInput("n-gram order must be >= 1");
  if (s.empty()) throw InvalidInput("sequence set is empty");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].size() < n) {
      throw InvalidInput("sequence " + std::to_string(i) + " has " +
                         std::to_string(s[i].size()) + " tokens, fewer than n=" +
                         std::to_string(n));
    }
  }
}

std::map<NGram, std::size_t> ngram_counts(const Sequence& seq, std::size_t n) {
  std::map<NGram, std::size_t> counts;
  if (seq.size() < n) return counts;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) {
    ++counts[NGram(seq.begin() + static_cast<std::ptrdiff_t>(i),
                   seq.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

// (unique, total) n-gram counts over the set.
std::pair<std::size_t, std::size_t> unique_and_total(std::span<const Sequence> s, std::size_t n) {
  std::map<NGram, std::size_t> all;
  std::size_t total = 0;
  for (const Sequence& seq : s) {
    for (const auto& [g, c] : ngram_counts(seq, n)) {
      all[g] += c;
      total += c;
    }
  }
  return {all.size(), total};
}

double sentence_bleu(const Sequence& hyp, const std::vector<const Sequence*>& refs,
                     std::size_t max_n) {
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto hyp_counts = ngram_counts(hyp, n);
    std::map<NGram, std::size_t> max_ref;
    for (const Sequence* r : refs) {
      for (const auto& [g, c] : ngram_counts(*r, n)) max_ref[g] = std::max(max_ref[g], c);
    }
    double matches = 0.0;
    double total = 0.0;
    for (const auto& [g, c] : hyp_counts) {
      const auto it = max_ref.find(g);
      matches += static_cast<double>(std::min(c, it == max_ref.end() ? 0 : it->second));
      total += static_cast<double>(c);
    }
    if (total == 0.0) return 0.0;
    if (matches == 0.0) {
      if (n == 1) return 0.0;
      matches += 1.0;
      total += 1.0;
    }
    log_sum += std::log(matches / total);
  }

  // Closest reference length, shorter one on ties.
  const double c = static_cast<double>(hyp.size());
  double r = static_cast<double>(refs.front()->size());
  for (const Sequence* ref : refs) {
    const double len = static_cast<double>(ref->size());
    if (std::abs(len - c) < std::abs(r - c) || (std::abs(len - c) == std::abs(r - c) && len < r)) {
      r = len;
    }
  }
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / static_cast<double>(max_n));
}

}  // namespace

double distinct_n(std::span<const Sequence> s, std::size_t n) {
  check_lengths(s, n);
  const auto [unique, total] = unique_and_total(s, n);
  return static_cast<double>(unique) / static_cast<double>(total);
}

double ead(std::span<const Sequence> s, std::size_t n, std::size_t vocab_size) {
  check_lengths(s, n);
  if (vocab_size == 0) throw InvalidInput("vocabulary size must be >= 1");
  const auto [unique, total] = unique_and_total(s, n);
  const double vn = std::pow(static_cast<double>(vocab_size), static_cast<double>(n));
  const double c = static_cast<double>(total);
  // V_n (1 - (1 - 1/V_n)^C), with expm1/log1p for large V_n.
  const double expected =
      vn == 1.0 ? 1.0 : -std::expm1(c * std::log1p(-1.0 / vn)) * vn;
  return static_cast<double>(unique) / expected;
}

double self_bleu(std::span<const Sequence> s, std::size_t max_n) {
  if (s.size() < 2) throw InvalidInput("self-BLEU needs at least 2 sequences, got " + std::to_string(s.size()));
  if (max_n == 0) throw InvalidInput("max n-gram order must be >= 1");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].empty()) throw InvalidInput("sequence " + std::to_string(i) + " is empty");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::vector<const Sequence*> refs;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j != i) refs.push_back(&s[j]);
    }
    total += sentence_bleu(s[i], refs, max_n);
  }
  return 100.0 * total / static_cast<double>(s.size());
}

double avg_pairwise_cosine(const EmbeddingSet& e) {
  if (e.rows() < 2) throw InvalidInput("pairwise cosine needs at least 2 rows");
  const SimilarityMatrix k = cosine_similarity(e);
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < e.rows(); ++i) {
    for (std::size_t j = i + 1; j < e.rows(); ++j) {
      total += k(i, j);
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("spearman inputs differ in length");
  if (x.size() < 3) throw InvalidInput("spearman needs at least 3 points");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw InvalidInput("spearman input is not finite");
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) throw InvalidInput("spearman correlation is undefined for a constant input");
  return sxy / std::sqrt(sxx * syy);
}

BenchmarkStats benchmark_stats(const std::vector<std::vector<double>>& values) {
  const std::size_t m = values.size();
  if (m < 2) throw InvalidInput("benchmark statistics need at least 2 methods");
  const std::size_t trials = values[0].size();
  if (trials < 1) throw InvalidInput("benchmark statistics need at least 1 trial");
  for (std::size_t i = 0; i < m; ++i) {
    if (values[i].size() != trials) {
      throw InvalidInput("method " + std::to_string(i) + " has " + std::to_string(values[i].size()) +
                         " trials, expected " + std::to_string(trials));
    }
    for (double v : values[i]) {
      if (!std::isfinite(v)) throw InvalidInput("method " + std::to_string(i) + " has a non-finite value");
    }
  }

  BenchmarkStats st;
  st.z.assign(m, std::vector<double>(trials));
  st.rank.assign(m, std::vector<double>(trials));
  st.mean_z.assign(m, 0.0);
  st.mean_rank.assign(m, 0.0);
  std::vector<double> col(m);
  for (std::size_t t = 0; t < trials; ++t) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      col[i] = values[i][t];
      mean += col[i];
    }
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (double v : col) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(m));
    // Negate so that rank 1 goes to the highest value.
    std::vector<double> neg(m);
    for (std::size_t i = 0; i < m; ++i) neg[i] = -col[i];
    const auto r = average_ranks(neg);
    for (std::size_t i = 0; i < m; ++i) {
      st.z[i][t] = sd < 1e-12 ? 0.0 : (col[i] - mean) / sd;
      st.rank[i][t] = r[i];
      st.mean_z[i] += st.z[i][t];
      st.mean_rank[i] += r[i];
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    st.mean_z[i] /= static_cast<double>(trials);
    st.mean_rank[i] /= static_cast<double>(trials);
  }
  return st;
}

}  // namespace pdpp
