#include <cmath>
#include <cstdio>

#include "pdpp/error.hpp"
#include "pdpp/metrics.hpp"
#include "pdpp/report.hpp"

namespace pdpp {
namespace {

std::string fixed(double x, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

constexpr std::size_t kBleuOrder = 4;

double final_cosine(const DecodeResult& r) {
  const std::size_t dim = r.embeddings.front().size();
  std::vector<double> flat;
  for (const auto& e : r.embeddings) flat.insert(flat.end(), e.begin(), e.end());
  return avg_pairwise_cosine(EmbeddingSet(r.embeddings.size(), dim, std::move(flat)));
}

}  // namespace

BetaSweep run_beta_sweep(const OracleDenoiser& model, const DecodeConfig& cfg,
                         const std::vector<double>& betas, std::size_t seeds) {
  if (cfg.k < 2) throw InvalidInput("beta sweep needs k >= 2 beams to measure diversity");
  if (betas.empty() || seeds == 0) throw InvalidInput("beta sweep needs betas and seeds");
  BetaSweep out;
  for (double beta : betas) {
    DecodeConfig c = cfg;
    c.beta = beta;
    double total = 0.0;
    for (std::size_t i = 0; i < seeds; ++i) {
      c.seed = derive_seed(cfg.seed, {i});
      total += final_cosine(decode(model, c));
    }
    out.rows.push_back({beta, total / static_cast<double>(seeds)});
  }
  if (out.rows.size() >= 3) {
    std::vector<double> x, y;
    for (const auto& row : out.rows) {
      x.push_back(std::log(row.beta));
      y.push_back(row.mean_cosine);
    }
    try {
      out.spearman_log_beta_cosine = spearman(x, y);
    } catch (const InvalidInput&) {
      // constant cosine across betas: correlation undefined
    }
  }
  return out;
}

std::string decode_report(const OracleDenoiser& model, const DecodeConfig& cfg,
                          const DecodeResult& result) {
  std::string out;
  out += "decode: k=" + std::to_string(cfg.k) + " w=" + std::to_string(cfg.w) +
         " length=" + std::to_string(cfg.length) + " steps=" + std::to_string(cfg.steps) +
         " beta=" + fixed(cfg.beta) + " selector=" + std::string(to_string(cfg.selector)) +
         " projector=" + std::string(to_string(cfg.projector)) +
         " scorer=" + std::string(to_string(cfg.scorer)) + " seed=" + std::to_string(cfg.seed) +
         "\n";
  out += "sequences:\n";
  std::vector<Sequence> seqs;
  for (std::size_t i = 0; i < result.sequences.size(); ++i) {
    const auto& s = result.sequences[i];
    seqs.emplace_back(s.begin(), s.end());
    std::string line = "  [" + std::to_string(i) + "]";
    for (Token t : s) line += " " + std::to_string(t);
    line += "   loglik=" + fixed(true_log_likelihood(model, s));
    out += line + "\n";
  }
  if (seqs.size() < 2) {
    out += "diversity metrics: unavailable, they need at least 2 sequences (got " +
           std::to_string(seqs.size()) + ")\n";
    return out;
  }
  out += "distinct_2=" + fixed(distinct_n(seqs, 2)) + "\n";
  out += "ead_2=" + fixed(ead(seqs, 2, model.vocab().size)) + "\n";
  out += "self_bleu_4=" + fixed(self_bleu(seqs, kBleuOrder)) + "\n";
  out += "avg_pairwise_cosine=" + fixed(final_cosine(result)) + "\n";
  return out;
}

std::string sweep_report(const BetaSweep& sweep) {
  std::string out = "beta sweep:\n";
  for (const auto& row : sweep.rows) {
    out += "  beta=" + fixed(row.beta) + "  mean_avg_cosine=" + fixed(row.mean_cosine, 6) + "\n";
  }
  out += "spearman(log beta, avg cosine)=" +
         (sweep.spearman_log_beta_cosine ? fixed(*sweep.spearman_log_beta_cosine)
                                         : std::string("undefined")) +
         "\n";
  return out;
}

}  // namespace pdpp
