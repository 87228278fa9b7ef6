#pragma once

// Masked discrete diffusion decoding against an exact Markov-chain denoiser.
//
// The denoiser is a first-order chain x_1 -> x_2 -> ... -> x_L with initial
// distribution pi and row-stochastic transitions A. Given a partially masked
// state, its posterior marginals P(x_i = v | unmasked tokens) follow from one
// forward and one backward pass. The decoder keeps k beams, branches each
// into w candidates with a stochastic projector, scores and embeds every
// candidate, and keeps k of them with a transversal selector (one candidate
// per parent beam).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pdpp/kernel.hpp"
#include "pdpp/rng.hpp"
#include "pdpp/selection.hpp"

namespace pdpp {

using Token = std::uint32_t;

/// Regular tokens are 0..size-1; the mask token is `size`.
struct Vocab {
  std::size_t size = 0;

  Token mask() const noexcept { return static_cast<Token>(size); }
  bool is_mask(Token t) const noexcept { return t == mask(); }
};

struct LatentState {
  std::vector<Token> tokens;
  double t = 1.0;

  std::size_t masked_count(const Vocab& v) const noexcept;
};

/// Fully masked state at t = 1 except for a frozen prompt prefix.
LatentState fully_masked(const Vocab& v, std::size_t length, std::span<const Token> prompt = {});

/// Time grid 1 = t_0 > t_1 > ... > t_T = 0.
class Schedule {
 public:
  static Schedule uniform(std::size_t steps);
  /// Strictly decreasing, first 1 and last 0.
  static Schedule from_times(std::vector<double> times);

  std::size_t steps() const noexcept { return times_.size() - 1; }
  double operator[](std::size_t i) const noexcept { return times_[i]; }
  std::span<const double> times() const noexcept { return times_; }

 private:
  explicit Schedule(std::vector<double> times) : times_(std::move(times)) {}
  std::vector<double> times_;
};

/// Per-position posterior rows (length x vocab, row-major). The flattened
/// row-major vector doubles as the candidate embedding.
struct DenoiserOutput {
  std::size_t length = 0;
  std::size_t vocab = 0;
  std::vector<double> probs;

  std::span<const double> row(std::size_t i) const noexcept {
    return {probs.data() + i * vocab, vocab};
  }
  std::span<const double> embedding() const noexcept { return probs; }
};

class OracleDenoiser {
 public:
  /// Validates: vocab >= 2, length >= 1, pi and every row of A nonnegative
  /// and summing to 1 within 1e-12.
  OracleDenoiser(std::size_t vocab_size, std::size_t length, std::vector<double> initial,
                 std::vector<double> transition);

  /// pi and A uniform.
  static OracleDenoiser uniform(std::size_t vocab_size, std::size_t length);

  /// pi and every row of A drawn from a symmetric Dirichlet(concentration).
  static OracleDenoiser random(std::size_t vocab_size, std::size_t length, std::uint64_t seed,
                               double concentration = 1.0);

  /// Fixed six-token demo chain mixing "sticky" tokens that mostly repeat
  /// with "diffuse" tokens whose successors are spread out.
  static OracleDenoiser toy_chain(std::size_t length);

  const Vocab& vocab() const noexcept { return vocab_; }
  std::size_t length() const noexcept { return length_; }
  std::span<const double> initial() const noexcept { return initial_; }
  std::span<const double> transition() const noexcept { return transition_; }
  double a(Token from, Token to) const noexcept { return transition_[from * vocab_.size + to]; }

 private:
  Vocab vocab_;
  std::size_t length_;
  std::vector<double> initial_;
  std::vector<double> transition_;
};

/// Throws InvalidInput when z has the wrong length or a token outside
/// vocab + mask, or when t is outside [0, 1].
void validate_state(const OracleDenoiser& model, const LatentState& z);

/// Exact posterior marginals by forward-backward. Unmasked positions get
/// one-hot rows. Throws InvalidInput when the observed tokens have
/// probability zero under the chain.
DenoiserOutput denoise(const OracleDenoiser& model, const LatentState& z);

enum class LladaMode { uniform, low_confidence };

/// Number of generated positions the LLaDA projector re-masks when going
/// from t to s with `masked` positions masked at t.
std::size_t llada_remask_budget(std::size_t masked, double t, double s);

/// Samples every position masked in z from its posterior row, then re-masks
/// llada_remask_budget(|M_t|, t, s) of the newly generated positions, either
/// uniformly or those with the smallest sampled-token probability (ties:
/// smallest index). Throws InvalidInput unless 0 <= s < z.t.
LatentState project_llada(const DenoiserOutput& out, const LatentState& z, double s,
                          LladaMode mode, Rng& rng);

/// Each position masked at t stays masked with probability s/t, otherwise it
/// is sampled from its posterior; unmasked positions are carried over.
LatentState project_mdlm(const DenoiserOutput& out, const LatentState& z, double s, Rng& rng);

/// -(1/|M|) sum_{i in M} H(p_i) in nats over positions masked in z; 0 when
/// nothing is masked.
double entropy_score(const DenoiserOutput& out, const LatentState& z);

/// (1/|M|) sum_{i in M} KL(p_i || uniform); 0 when nothing is masked.
double self_certainty_score(const DenoiserOutput& out, const LatentState& z);

/// log pi(x_1) + sum_i log A(x_{i-1}, x_i). Throws InvalidInput on a mask
/// token or a length mismatch.
double true_log_likelihood(const OracleDenoiser& model, std::span<const Token> seq);

enum class ProjectorKind { llada_uniform, llada_low_confidence, mdlm };
enum class ScorerKind { entropy, self_certainty };
enum class SimilarityKind { cosine, rbf };
enum class SelectorKind { d5p4, topk, mmr, random };

std::string_view to_string(ProjectorKind p) noexcept;
std::string_view to_string(ScorerKind s) noexcept;
std::string_view to_string(SimilarityKind s) noexcept;
std::string_view to_string(SelectorKind s) noexcept;

/// Chain description inside a decode config.
struct ModelSpec {
  enum class Kind { toy, uniform, random, explicit_chain };
  Kind kind = Kind::toy;
  std::size_t vocab_size = 6;     // uniform / random
  std::uint64_t seed = 0;         // random
  double concentration = 1.0;     // random
  std::vector<double> initial;    // explicit_chain
  std::vector<double> transition; // explicit_chain, row-major vocab x vocab

  OracleDenoiser build(std::size_t length) const;
};

struct DecodeConfig {
  std::size_t k = 4;
  std::size_t w = 4;
  std::size_t length = 16;
  std::size_t steps = 8;
  double beta = 1.0;
  KernelVariant variant = KernelVariant::additive;
  SimilarityKind similarity = SimilarityKind::cosine;
  std::optional<double> gamma;  // RBF only; default 1 / embedding dimension
  ProjectorKind projector = ProjectorKind::llada_low_confidence;
  ScorerKind scorer = ScorerKind::entropy;
  SelectorKind selector = SelectorKind::d5p4;
  MultiInitStarts starts = MultiInitStarts::all_items;
  double alpha_div = 1.0;
  std::uint64_t seed = 0;
  std::vector<Token> prompt;  // frozen prefix, counted inside `length`
  ModelSpec model;

  /// Optional beta sweep used by the decode report.
  std::vector<double> sweep_betas;
  std::size_t sweep_seeds = 0;

  void validate() const;
};

/// Strict JSON loading; errors name the offending field path.
DecodeConfig decode_config_from_json(std::string_view json_text);

struct DecodeStep {
  double t = 1.0;
  double s = 0.0;
  std::vector<double> scores;          // one per candidate (parent-major)
  std::vector<std::size_t> selected;   // candidate indices, ascending
  double log_det = 0.0;                // of the selected set under this step's kernel
};

struct DecodeResult {
  std::vector<std::vector<Token>> sequences;       // k final beams
  std::vector<std::vector<double>> embeddings;     // final flattened posteriors
  std::vector<DecodeStep> trace;
};

/// Full branch-score-select loop. Deterministic in (model, cfg).
DecodeResult decode(const OracleDenoiser& model, const DecodeConfig& cfg);

/// Trace as JSON: {"steps":[{t,s,scores,selected,log_det}], "sequences":[...]}.
std::string trace_to_json(const DecodeResult& r);

/// One sequence per line, tokens as space-separated integers.
std::string sequences_to_text(const DecodeResult& r);

}  // namespace pdpp
