#pragma once

// Reference-free diversity metrics over sets of token sequences, rank
// correlation, and per-trial benchmark normalisation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pdpp/kernel.hpp"

namespace pdpp {

using Sequence = std::vector<std::uint32_t>;

/// Unique n-grams across the set over the total n-gram count.
double distinct_n(std::span<const Sequence> s, std::size_t n);

/// Unique n-gram count over its expectation under uniform generation,
/// V_n (1 - (1 - 1/V_n)^C) with V_n = V^n and C the total n-gram count.
double ead(std::span<const Sequence> s, std::size_t n, std::size_t vocab_size);

/// Mean BLEU (0-100) of each sequence against all others as references.
/// Uniform weights over 1..max_n, closest-length brevity penalty, and
/// add-one smoothing for orders n >= 2 with zero matches.
double self_bleu(std::span<const Sequence> s, std::size_t max_n);

/// Mean cosine similarity over all unordered pairs of rows.
double avg_pairwise_cosine(const EmbeddingSet& e);

/// Pearson correlation of average ranks. Throws InvalidInput for length
/// mismatch, fewer than 3 points, or a constant input.
double spearman(std::span<const double> x, std::span<const double> y);

/// Average ranks (1 = smallest), ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);

struct BenchmarkStats {
  std::vector<double> mean_z;     // per method
  std::vector<double> mean_rank;  // per method, 1 = best
  std::vector<std::vector<double>> z;     // [method][trial]
  std::vector<std::vector<double>> rank;  // [method][trial]
};

/// values[method][trial]. Per trial: population z-scores across methods
/// (all 0 when the spread is below 1e-12) and ranks with 1 = highest value,
/// ties averaged. Throws InvalidInput for ragged input, fewer than 2 methods,
/// no trials, or non-finite values.
BenchmarkStats benchmark_stats(const std::vector<std::vector<double>>& values);

}  // namespace pdpp
