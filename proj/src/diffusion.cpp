#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pdpp/diffusion.hpp"
#include "pdpp/error.hpp"

namespace pdpp {
namespace {

constexpr double kStochasticTolerance = 1e-12;

void check_distribution(std::span<const double> p, const std::string& what) {
  double total = 0.0;
  for (double x : p) {
    if (!std::isfinite(x) || x < 0.0) throw InvalidInput(what + " has a negative or non-finite entry");
    total += x;
  }
  if (std::abs(total - 1.0) > kStochasticTolerance) {
    throw InvalidInput(what + " sums to " + std::to_string(total) + ", expected 1");
  }
}

void check_step(const LatentState& z, double s) {
  if (!(s >= 0.0) || !(s < z.t)) {
    throw InvalidInput("projection target time s=" + std::to_string(s) +
                       " must satisfy 0 <= s < t=" + std::to_string(z.t));
  }
}

void check_shapes(const DenoiserOutput& out, const LatentState& z) {
  if (out.length != z.tokens.size()) {
    throw InvalidInput("denoiser output covers " + std::to_string(out.length) +
                       " positions but the state has " + std::to_string(z.tokens.size()));
  }
}

double row_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

// Mean entropy over positions masked in z, or nullopt when none are.
std::optional<double> mean_masked_entropy(const DenoiserOutput& out, const LatentState& z) {
  check_shapes(out, z);
  const Vocab v{out.vocab};
  double total = 0.0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < z.tokens.size(); ++i) {
    if (!v.is_mask(z.tokens[i])) continue;
    total += row_entropy(out.row(i));
    ++m;
  }
  if (m == 0) return std::nullopt;
  return total / static_cast<double>(m);
}

}  // namespace

std::size_t LatentState::masked_count(const Vocab& v) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(tokens.begin(), tokens.end(), [&](Token t) { return v.is_mask(t); }));
}

LatentState fully_masked(const Vocab& v, std::size_t length, std::span<const Token> prompt) {
  if (prompt.size() >= length) {
    throw InvalidInput("prompt of " + std::to_string(prompt.size()) +
                       " tokens leaves nothing to generate in length " + std::to_string(length));
  }
  LatentState z;
  z.t = 1.0;
  z.tokens.assign(length, v.mask());
  std::copy(prompt.begin(), prompt.end(), z.tokens.begin());
  return z;
}

Schedule Schedule::uniform(std::size_t steps) {
  if (steps == 0) throw InvalidInput("schedule needs at least one step");
  std::vector<double> t(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    t[i] = 1.0 - static_cast<double>(i) / static_cast<double>(steps);
  }
  t.front() = 1.0;
  t.back() = 0.0;
  return Schedule(std::move(t));
}

Schedule Schedule::from_times(std::vector<double> times) {
  if (times.size() < 2) throw InvalidInput("schedule needs at least two time points");
  if (times.front() != 1.0 || times.back() != 0.0) {
    throw InvalidInput("schedule must start at exactly 1 and end at exactly 0");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] < times[i - 1])) throw InvalidInput("schedule must be strictly decreasing");
  }
  return Schedule(std::move(times));
}

OracleDenoiser::OracleDenoiser(std::size_t vocab_size, std::size_t length,
                               std::vector<double> initial, std::vector<double> transition)
    : vocab_{vocab_size}, length_(length), initial_(std::move(initial)),
      transition_(std::move(transition)) {
  if (vocab_size < 2) throw InvalidInput("vocabulary needs at least 2 tokens");
  if (length == 0) throw InvalidInput("sequence length must be >= 1");
  if (initial_.size() != vocab_size) {
    throw InvalidInput("initial distribution has " + std::to_string(initial_.size()) +
                       " entries, expected " + std::to_string(vocab_size));
  }
  if (transition_.size() != vocab_size * vocab_size) {
    throw InvalidInput("transition matrix has " + std::to_string(transition_.size()) +
                       " entries, expected " + std::to_string(vocab_size * vocab_size));
  }
  check_distribution(initial_, "initial distribution");
  for (std::size_t u = 0; u < vocab_size; ++u) {
    check_distribution({transition_.data() + u * vocab_size, vocab_size},
                       "transition row " + std::to_string(u));
  }
}

OracleDenoiser OracleDenoiser::uniform(std::size_t vocab_size, std::size_t length) {
  const double p = 1.0 / static_cast<double>(vocab_size);
  return OracleDenoiser(vocab_size, length, std::vector<double>(vocab_size, p),
                        std::vector<double>(vocab_size * vocab_size, p));
}

OracleDenoiser OracleDenoiser::random(std::size_t vocab_size, std::size_t length,
                                      std::uint64_t seed, double concentration) {
  if (!(concentration > 0.0)) throw InvalidInput("Dirichlet concentration must be > 0");
  Rng rng(seed);
  std::gamma_distribution<double> gamma(concentration, 1.0);
  auto draw = [&](double* p) {
    double total = 0.0;
    for (std::size_t v = 0; v < vocab_size; ++v) {
      p[v] = gamma(rng);
      total += p[v];
    }
    if (!(total > 0.0)) {
      std::fill(p, p + vocab_size, 1.0 / static_cast<double>(vocab_size));
      return;
    }
    // Renormalise then put the rounding residue on the largest entry.
    for (std::size_t v = 0; v < vocab_size; ++v) p[v] /= total;
    const double sum = std::accumulate(p, p + vocab_size, 0.0);
    *std::max_element(p, p + vocab_size) += 1.0 - sum;
  };
  std::vector<double> initial(vocab_size);
  std::vector<double> transition(vocab_size * vocab_size);
  draw(initial.data());
  for (std::size_t u = 0; u < vocab_size; ++u) draw(transition.data() + u * vocab_size);
  return OracleDenoiser(vocab_size, length, std::move(initial), std::move(transition));
}

OracleDenoiser OracleDenoiser::toy_chain(std::size_t length) {
  constexpr std::size_t V = 6;
  // Tokens 0-2 repeat with probability 0.9; tokens 3-5 move uniformly.
  std::vector<double> a(V * V, 0.0);
  for (std::size_t u = 0; u < V; ++u) {
    for (std::size_t v = 0; v < V; ++v) {
      if (u < 3) {
        a[u * V + v] = (u == v) ? 0.9 : 0.02;
      } else {
        a[u * V + v] = 1.0 / V;
      }
    }
  }
  return OracleDenoiser(V, length, std::vector<double>(V, 1.0 / V), std::move(a));
}

void validate_state(const OracleDenoiser& model, const LatentState& z) {
  if (z.tokens.size() != model.length()) {
    throw InvalidInput("state has " + std::to_string(z.tokens.size()) +
                       " positions, model length is " + std::to_string(model.length()));
  }
  if (!(z.t >= 0.0 && z.t <= 1.0)) throw InvalidInput("state time must lie in [0, 1]");
  for (std::size_t i = 0; i < z.tokens.size(); ++i) {
    if (z.tokens[i] > model.vocab().mask()) {
      throw InvalidInput("token " + std::to_string(z.tokens[i]) + " at position " +
                         std::to_string(i) + " is outside the vocabulary");
    }
  }
}

DenoiserOutput denoise(const OracleDenoiser& model, const LatentState& z) {
  validate_state(model, z);
  const std::size_t L = model.length();
  const std::size_t V = model.vocab().size;
  const Vocab& vocab = model.vocab();

  auto allowed = [&](std::size_t i, std::size_t v) {
    return vocab.is_mask(z.tokens[i]) || z.tokens[i] == v;
  };

  // Scaled forward and backward messages, each row normalised to sum 1.
  std::vector<double> fwd(L * V, 0.0);
  std::vector<double> bwd(L * V, 0.0);
  auto normalise = [&](double* row) {
    double total = 0.0;
    for (std::size_t v = 0; v < V; ++v) total += row[v];
    if (!(total > 0.0)) throw InvalidInput("observed tokens have zero probability under the chain");
    for (std::size_t v = 0; v < V; ++v) row[v] /= total;
  };

  for (std::size_t v = 0; v < V; ++v) fwd[v] = allowed(0, v) ? model.initial()[v] : 0.0;
  normalise(fwd.data());
  for (std::size_t i = 1; i < L; ++i) {
    double* cur = fwd.data() + i * V;
    const double* prev = fwd.data() + (i - 1) * V;
    for (std::size_t v = 0; v < V; ++v) {
      if (!allowed(i, v)) continue;
      double s = 0.0;
      for (std::size_t u = 0; u < V; ++u) s += prev[u] * model.a(u, v);
      cur[v] = s;
    }
    normalise(cur);
  }

  std::fill(bwd.begin() + (L - 1) * V, bwd.end(), 1.0 / static_cast<double>(V));
  for (std::size_t i = L - 1; i-- > 0;) {
    double* cur = bwd.data() + i * V;
    const double* next = bwd.data() + (i + 1) * V;
    for (std::size_t u = 0; u < V; ++u) {
      double s = 0.0;
      for (std::size_t v = 0; v < V; ++v) {
        if (allowed(i + 1, v)) s += model.a(u, v) * next[v];
      }
      cur[u] = s;
    }
    normalise(cur);
  }

  DenoiserOutput out;
  out.length = L;
  out.vocab = V;
  out.probs.assign(L * V, 0.0);
  for (std::size_t i = 0; i < L; ++i) {
    double* row = out.probs.data() + i * V;
    if (!vocab.is_mask(z.tokens[i])) {
      row[z.tokens[i]] = 1.0;
      continue;
    }
    for (std::size_t v = 0; v < V; ++v) row[v] = fwd[i * V + v] * bwd[i * V + v];
    normalise(row);
  }
  return out;
}

std::size_t llada_remask_budget(std::size_t masked, double t, double s) {
  // The small offset keeps exact ratios such as 3 * (1/3) / 1 from flooring
  // one below their integer value.
  const double raw = static_cast<double>(masked) * s / t;
  const auto budget = static_cast<std::size_t>(std::floor(raw + 1e-9));
  return std::min(budget, masked);
}

LatentState project_llada(const DenoiserOutput& out, const LatentState& z, double s,
                          LladaMode mode, Rng& rng) {
  check_step(z, s);
  check_shapes(out, z);
  const Vocab v{out.vocab};
  LatentState next = z;
  next.t = s;

  std::vector<std::size_t> generated;
  std::vector<double> confidence;
  for (std::size_t i = 0; i < z.tokens.size(); ++i) {
    if (!v.is_mask(z.tokens[i])) continue;
    const std::size_t tok = sample_categorical(rng, out.row(i));
    next.tokens[i] = static_cast<Token>(tok);
    generated.push_back(i);
    confidence.push_back(out.row(i)[tok]);
  }

  const std::size_t budget = llada_remask_budget(generated.size(), z.t, s);
  if (budget == 0) return next;

  if (mode == LladaMode::uniform) {
    // Partial Fisher-Yates: the first `budget` slots are a uniform subset.
    for (std::size_t r = 0; r < budget; ++r) {
      const std::size_t pick = r + uniform_index(rng, generated.size() - r);
      std::swap(generated[r], generated[pick]);
      next.tokens[generated[r]] = v.mask();
    }
  } else {
    std::vector<std::size_t> order(generated.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return confidence[a] < confidence[b];
    });
    for (std::size_t r = 0; r < budget; ++r) next.tokens[generated[order[r]]] = v.mask();
  }
  return next;
}

LatentState project_mdlm(const DenoiserOutput& out, const LatentState& z, double s, Rng& rng) {
  check_step(z, s);
  check_shapes(out, z);
  const Vocab v{out.vocab};
  const double keep = s / z.t;
  LatentState next = z;
  next.t = s;
  for (std::size_t i = 0; i < z.tokens.size(); ++i) {
    if (!v.is_mask(z.tokens[i])) continue;
    if (uniform01(rng) < keep) continue;
    next.tokens[i] = static_cast<Token>(sample_categorical(rng, out.row(i)));
  }
  return next;
}

double entropy_score(const DenoiserOutput& out, const LatentState& z) {
  const auto h = mean_masked_entropy(out, z);
  return h ? -*h : 0.0;
}

double self_certainty_score(const DenoiserOutput& out, const LatentState& z) {
  const auto h = mean_masked_entropy(out, z);
  return h ? std::log(static_cast<double>(out.vocab)) - *h : 0.0;
}

double true_log_likelihood(const OracleDenoiser& model, std::span<const Token> seq) {
  if (seq.size() != model.length()) {
    throw InvalidInput("sequence has " + std::to_string(seq.size()) +
                       " tokens, model length is " + std::to_string(model.length()));
  }
  const std::size_t V = model.vocab().size;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i] >= V) {
      throw InvalidInput("position " + std::to_string(i) +
                         (model.vocab().is_mask(seq[i]) ? " is masked" : " is out of vocabulary"));
    }
  }
  double ll = std::log(model.initial()[seq[0]]);
  for (std::size_t i = 1; i < seq.size(); ++i) ll += std::log(model.a(seq[i - 1], seq[i]));
  return ll;
}

}  // namespace pdpp
