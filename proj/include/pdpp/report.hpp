#pragma once

// Text reports for decode runs and the diversity-versus-beta sweep.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pdpp/diffusion.hpp"

namespace pdpp {

struct BetaSweepRow {
  double beta = 0.0;
  double mean_cosine = 0.0;  // over seeds, of final-beam avg pairwise cosine
};

struct BetaSweep {
  std::vector<BetaSweepRow> rows;
  std::optional<double> spearman_log_beta_cosine;  // needs >= 3 distinct points
};

/// Decodes `seeds` times per beta (seed i uses derive_seed(cfg.seed, {i}))
/// and averages the final beams' pairwise cosine. Requires cfg.k >= 2.
BetaSweep run_beta_sweep(const OracleDenoiser& model, const DecodeConfig& cfg,
                         const std::vector<double>& betas, std::size_t seeds);

/// Final sequences with their chain log-likelihoods plus distinct-2, EAD,
/// self-BLEU and average pairwise cosine (or a note when k < 2).
std::string decode_report(const OracleDenoiser& model, const DecodeConfig& cfg,
                          const DecodeResult& result);

std::string sweep_report(const BetaSweep& sweep);

}  // namespace pdpp
