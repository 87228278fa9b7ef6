#pragma once

// Subset selectors over an L-ensemble.
//
// The partition-constrained greedy MAP solver maintains, for every candidate
// i, the Cholesky row c_i of L restricted to the current selection Y and the
// residual variance d_i^2 = L_ii - |c_i|^2. Adding item j extends every c_i
// by e_i = (L_ji - <c_j, c_i>) / d_j and shrinks d_i^2 by e_i^2, so
// log det(L_Y) is the running sum of log d_j^2 over the picks. Under the
// transversal constraint only candidates from groups not yet represented in
// Y are updated and eligible.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pdpp/kernel.hpp"
#include "pdpp/rng.hpp"

namespace pdpp {

enum class Method { greedy_map, greedy_map_multi, divbs, random, kdpp, brute_force, topk };

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view s);

struct SelectionResult {
  std::vector<std::size_t> indices;   // in selection order
  double log_det = 0.0;               // log det(L_S); -inf when singular
  std::vector<double> marginal_gains; // per-step log d_j^2 (MMR: per-step score)
  double elapsed = 0.0;               // seconds
  Method method = Method::greedy_map;
};

/// Candidates whose residual d_i^2 is at or below this are never picked.
inline constexpr double kMarginalFloor = 1e-12;

/// Optional per-step snapshot of every candidate's d_i^2 (after the update of
/// that step) for checking the monotonicity of the marginals.
struct GreedyTrace {
  std::vector<std::vector<double>> marginals;
};

/// Greedy MAP: repeatedly adds argmax_i log d_i^2 over eligible candidates.
/// `constrained` restricts the pick to unused groups (k <= num_groups).
/// `init` forces the first pick. Ties go to the smallest index.
/// Throws InvalidInput for infeasible k and RankDeficient when no eligible
/// candidate has d_i^2 > kMarginalFloor before k picks.
SelectionResult greedy_map(const LEnsemble& l, std::size_t k, bool constrained,
                           std::optional<std::size_t> init = std::nullopt,
                           GreedyTrace* trace = nullptr);

enum class MultiInitStarts {
  all_items,     // one trajectory per candidate (|Z| = n)
  group_argmax,  // one trajectory per group, starting at the group's largest L_ii
};

/// Runs one constrained greedy trajectory per start and returns the one with
/// the largest accumulated log-determinant (ties: earliest start). Selects a
/// full transversal (one item per group).
SelectionResult greedy_map_multi_init(const LEnsemble& l,
                                      MultiInitStarts starts = MultiInitStarts::all_items);

/// Exhaustive maximiser of log det(L_S) over transversals (constrained) or
/// all k-subsets. Ties go to the lexicographically smallest index list.
/// Throws SearchSpaceTooLarge above kBruteForceCap subsets.
inline constexpr double kBruteForceCap = 1e7;
SelectionResult brute_force_map(const LEnsemble& l, std::size_t k, bool constrained);

/// Number of subsets brute_force_map would enumerate (as a double; may be huge).
double brute_force_count(const Partition& p, std::size_t k, bool constrained);

/// Transversal MMR: each step picks the candidate from an unused group
/// maximising Q_i - alpha_div * max_{j in Y} K_ij. With multi_init, one
/// trajectory per start item and the best cumulative score wins.
/// marginal_gains holds the per-step scores (their sum is the cumulative
/// score); log_det is evaluated under `companion` if given, else NaN.
SelectionResult mmr_select(const QualityVector& q, const SimilarityMatrix& k,
                           const Partition& partition, double alpha_div, bool multi_init,
                           const LEnsemble* companion = nullptr);

/// Standard beam search: argmax of Q inside each group (ties: smallest index).
SelectionResult topk_per_group(const QualityVector& q, const Partition& partition,
                               const LEnsemble* companion = nullptr);

/// One uniformly random member per group.
SelectionResult random_transversal(const Partition& partition, std::uint64_t seed,
                                   const LEnsemble* companion = nullptr);

/// Exact k-DPP sample (no partition constraint): eigendecomposition,
/// elementary-symmetric-polynomial selection of k eigenvectors, then the
/// projection chain rule. Throws InvalidInput when k exceeds the numerical
/// rank of L.
SelectionResult kdpp_sample(const LEnsemble& l, std::size_t k, std::uint64_t seed);

/// Reusable sampler: the eigendecomposition is computed once.
class KdppSampler {
 public:
  KdppSampler(const SymMatrix& l, std::size_t k);

  std::vector<std::size_t> sample(Rng& rng) const;

  std::size_t numerical_rank() const noexcept { return rank_; }

 private:
  std::size_t n_;
  std::size_t k_;
  std::size_t rank_;
  std::vector<double> lambda_;          // normalised eigenvalues (ascending)
  DenseMatrix vectors_;                 // columns
  std::vector<std::vector<double>> esp_;  // esp_[l][m] = e_l(lambda_1..lambda_m)
};

/// log det of the principal submatrix L_S via Cholesky; 0 for the empty set
/// and -inf when L_S is singular (pivot <= kPivotTolerance).
double evaluate_log_det(const LEnsemble& l, std::span<const std::size_t> s);
double evaluate_log_det(const SymMatrix& l, std::span<const std::size_t> s);

}  // namespace pdpp
