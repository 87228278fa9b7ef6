#pragma once

// Inner loops shared by the linear algebra, kernel and greedy code.
//
// Every kernel has a scalar reference implementation; vector variants
// (AVX2+FMA on x86-64, NEON on AArch64) are selected once at startup from
// the CPU feature bits. Variants agree with the reference to rounding: the
// greedy update keeps the per-candidate summation order (only FMA contraction
// differs), while the reductions use lane-parallel partial sums.

#include <cstddef>
#include <span>
#include <string_view>

namespace pdpp::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa) noexcept;

/// Candidates are stored in panels of kPanel consecutive indices; the
/// greedy history of one panel is contiguous across depths, so the update
/// streams through memory instead of striding by n per depth.
inline constexpr std::size_t kPanel = 4;

/// Position of (depth s, candidate i) in a history buffer holding
/// `capacity` depths for every candidate.
constexpr std::size_t history_index(std::size_t s, std::size_t i, std::size_t capacity) noexcept {
  return (i / kPanel) * kPanel * capacity + s * kPanel + i % kPanel;
}

/// Doubles needed for a history of n candidates and `capacity` depths.
constexpr std::size_t history_size(std::size_t n, std::size_t capacity) noexcept {
  return (n + kPanel - 1) / kPanel * kPanel * capacity;
}

/// Arguments of the greedy marginal update over a contiguous candidate range.
///
/// For every i in [begin, end), with H(s, i) = history[history_index(s, i, capacity)]:
///   e_i      = (pivot_row[i] - sum_{s<depth} coeffs[s] * H(s, i)) * inv_pivot
///   H(depth, i) = e_i
///   d2[i]    = max(d2[i] - e_i^2, 0)
struct ProjectUpdate {
  const double* pivot_row;  // row j of L
  double* history;
  std::size_t capacity;     // depths allocated per candidate (> depth)
  std::size_t depth;
  const double* coeffs;     // c_j, length depth
  double inv_pivot;         // 1 / sqrt(d_j^2)
  double* d2;
  std::size_t begin;
  std::size_t end;
};

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  /// x <- c*x - s*y ; y <- s*x + c*y  (Givens/Jacobi rotation of two rows)
  void (*rotate)(double* x, double* y, std::size_t n, double c, double s);
  void (*project_update)(const ProjectUpdate& args);
  /// Smallest i with x[i] = max(x) when that maximum is > floor, else n.
  std::size_t (*argmax_above)(const double* x, std::size_t n, double floor);
};

/// Best ISA supported by this CPU and build.
Isa detected_isa() noexcept;

/// True when `isa` was compiled in and the CPU supports it.
bool isa_available(Isa isa) noexcept;

/// Table for a specific ISA; throws InvalidInput when unavailable.
const KernelTable& kernels_for(Isa isa);

/// Currently active table (defaults to detected_isa()).
const KernelTable& kernels() noexcept;

/// Override the active ISA (tests and benchmarks). Not thread-safe with
/// concurrent kernel calls.
void set_active_isa(Isa isa);

/// RAII override of the active ISA.
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa);
  ~ScopedIsa();
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  return kernels().dot(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const double> a,
                               std::span<const double> b) noexcept {
  return kernels().squared_distance(a.data(), b.data(), a.size());
}

}  // namespace pdpp::simd
