#include <chrono>
#include <cmath>
#include <limits>

#include "pdpp/error.hpp"
#include "pdpp/selection.hpp"
#include "pdpp/simd.hpp"

namespace pdpp {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// In-place Cholesky of the m x m principal block of l picked by idx;
// returns the log-determinant or -inf on a pivot at or below tolerance.
double principal_log_det(const SymMatrix& l, const std::size_t* idx, std::size_t m,
                         std::vector<double>& g) noexcept {
  g.assign(m * m, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = l(idx[i], idx[j]);
      for (std::size_t t = 0; t < j; ++t) s -= g[i * m + t] * g[j * m + t];
      if (i == j) {
        if (!(s > kPivotTolerance)) return kNegInf;
        const double d = std::sqrt(s);
        g[i * m + i] = d;
        total += 2.0 * std::log(d);
      } else {
        g[i * m + j] = s / g[j * m + j];
      }
    }
  }
  return total;
}

double companion_log_det(const LEnsemble* companion, std::span<const std::size_t> s) {
  if (!companion) return std::numeric_limits<double>::quiet_NaN();
  return evaluate_log_det(*companion, s);
}

void check_companion(const LEnsemble* companion, const Partition& p) {
  if (companion && !(companion->partition() == p)) {
    throw InvalidInput("companion kernel partition does not match the selector partition");
  }
}

double choose(std::size_t n, std::size_t k) {
  double c = 1.0;
  for (std::size_t i = 0; i < k; ++i) c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return c;
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::greedy_map: return "greedy_map";
    case Method::greedy_map_multi: return "greedy_map_multi";
    case Method::divbs: return "divbs";
    case Method::random: return "random";
    case Method::kdpp: return "kdpp";
    case Method::brute_force: return "brute_force";
    case Method::topk: return "topk";
  }
  return "unknown";
}

Method parse_method(std::string_view s) {
  for (Method m : {Method::greedy_map, Method::greedy_map_multi, Method::divbs, Method::random,
                   Method::kdpp, Method::brute_force, Method::topk}) {
    if (s == to_string(m)) return m;
  }
  if (s == "mmr") return Method::divbs;
  throw InvalidInput("unknown method '" + std::string(s) +
                     "' (expected greedy_map, greedy_map_multi, divbs, random, kdpp, "
                     "brute_force or topk)");
}

double evaluate_log_det(const SymMatrix& l, std::span<const std::size_t> s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] >= l.dim()) {
      throw InvalidInput("index " + std::to_string(s[i]) + " out of range for kernel of size " +
                         std::to_string(l.dim()));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (s[i] == s[j]) throw InvalidInput("duplicate index " + std::to_string(s[i]));
    }
  }
  if (s.empty()) return 0.0;
  std::vector<double> g;
  return principal_log_det(l, s.data(), s.size(), g);
}

double evaluate_log_det(const LEnsemble& l, std::span<const std::size_t> s) {
  return evaluate_log_det(l.kernel(), s);
}

double brute_force_count(const Partition& p, std::size_t k, bool constrained) {
  if (constrained) {
    // choose k of the groups, then one member of each
    return choose(p.num_groups(), k) * std::pow(static_cast<double>(p.group_size()), k);
  }
  return choose(p.size(), k);
}

SelectionResult brute_force_map(const LEnsemble& l, std::size_t k, bool constrained) {
  const auto t0 = Clock::now();
  const Partition& p = l.partition();
  if (k == 0) throw InvalidInput("selection size k must be >= 1");
  if (constrained ? k > p.num_groups() : k > l.size()) {
    throw InvalidInput("cannot pick " + std::to_string(k) + " items from this partition");
  }
  const double count = brute_force_count(p, k, constrained);
  if (count > kBruteForceCap) throw SearchSpaceTooLarge(count, kBruteForceCap);

  const SymMatrix& kernel = l.kernel();
  const std::size_t n = l.size();
  const std::size_t w = p.group_size();
  std::vector<std::size_t> current(k);
  std::vector<std::size_t> best;
  double best_value = kNegInf;
  std::vector<double> scratch;

  // Subsets are visited in lexicographic order of their sorted index lists,
  // so a strict comparison keeps the smallest list among ties.
  auto visit = [&] {
    const double v = principal_log_det(kernel, current.data(), k, scratch);
    if (best.empty() || v > best_value) {
      best_value = v;
      best = current;
    }
  };

  // Recursive enumeration of increasing index lists; under the constraint
  // each next index must lie in a later group than the previous one.
  auto rec = [&](auto&& self, std::size_t pos, std::size_t lo) -> void {
    if (pos == k) {
      visit();
      return;
    }
    for (std::size_t i = lo; i + (k - pos) <= n; ++i) {
      if (constrained && p.num_groups() - p.group(i) < k - pos) break;
      current[pos] = i;
      self(self, pos + 1, constrained ? (p.group(i) + 1) * w : i + 1);
    }
  };
  rec(rec, 0, 0);

  SelectionResult r;
  r.indices = std::move(best);
  r.log_det = best_value;
  r.method = Method::brute_force;
  r.elapsed = seconds_since(t0);
  return r;
}

SelectionResult mmr_select(const QualityVector& q, const SimilarityMatrix& kmat,
                           const Partition& partition, double alpha_div, bool multi_init,
                           const LEnsemble* companion) {
  const auto t0 = Clock::now();
  const std::size_t n = partition.size();
  if (q.size() != n || kmat.dim() != n) {
    throw InvalidInput("dimension mismatch: partition covers " + std::to_string(n) +
                       " items, quality has " + std::to_string(q.size()) +
                       ", similarity has " + std::to_string(kmat.dim()));
  }
  if (!(alpha_div >= 0.0) || !std::isfinite(alpha_div)) {
    throw InvalidInput("alpha_div must be a finite nonnegative number");
  }
  check_companion(companion, partition);

  const std::size_t k = partition.num_groups();
  std::vector<double> penalty(n, 0.0);
  std::vector<char> group_used(k);

  struct Run {
    std::vector<std::size_t> indices;
    std::vector<double> scores;
    double total = 0.0;
  };

  const std::size_t w = partition.group_size();
  const SymMatrix& sim = kmat.matrix();

  // Only unused groups are scanned and updated; a used group never becomes
  // eligible again.
  auto run = [&](std::optional<std::size_t> start) {
    Run out;
    std::fill(group_used.begin(), group_used.end(), 0);
    for (std::size_t step = 0; step < k; ++step) {
      std::size_t j = n;
      double best = 0.0;
      if (step == 0 && start) {
        j = *start;
        best = q[j];
      } else {
        for (std::size_t g = 0; g < k; ++g) {
          if (group_used[g]) continue;
          for (std::size_t i = g * w; i < (g + 1) * w; ++i) {
            const double score = step == 0 ? q[i] : q[i] - alpha_div * penalty[i];
            if (j == n || score > best) {
              best = score;
              j = i;
            }
          }
        }
      }
      out.indices.push_back(j);
      out.scores.push_back(best);
      out.total += best;
      group_used[partition.group(j)] = 1;
      const auto row = sim.row(j);
      for (std::size_t g = 0; g < k; ++g) {
        if (group_used[g]) continue;
        for (std::size_t i = g * w; i < (g + 1) * w; ++i) {
          penalty[i] = step == 0 ? row[i] : std::max(penalty[i], row[i]);
        }
      }
    }
    return out;
  };

  Run best = run(std::nullopt);
  if (multi_init) {
    for (std::size_t b = 0; b < n; ++b) {
      Run r = run(b);
      if (r.total > best.total) best = std::move(r);
    }
  }

  SelectionResult r;
  r.indices = std::move(best.indices);
  r.marginal_gains = std::move(best.scores);
  r.log_det = companion_log_det(companion, r.indices);
  r.method = Method::divbs;
  r.elapsed = seconds_since(t0);
  return r;
}

SelectionResult topk_per_group(const QualityVector& q, const Partition& partition,
                               const LEnsemble* companion) {
  const auto t0 = Clock::now();
  if (q.size() != partition.size()) {
    throw InvalidInput("dimension mismatch: partition covers " +
                       std::to_string(partition.size()) + " items, quality has " +
                       std::to_string(q.size()));
  }
  check_companion(companion, partition);
  SelectionResult r;
  for (std::size_t g = 0; g < partition.num_groups(); ++g) {
    std::size_t best = partition.first(g);
    for (std::size_t i = best + 1; i < partition.first(g) + partition.group_size(); ++i) {
      if (q[i] > q[best]) best = i;
    }
    r.indices.push_back(best);
  }
  r.log_det = companion_log_det(companion, r.indices);
  r.method = Method::topk;
  r.elapsed = seconds_since(t0);
  return r;
}

SelectionResult random_transversal(const Partition& partition, std::uint64_t seed,
                                   const LEnsemble* companion) {
  const auto t0 = Clock::now();
  check_companion(companion, partition);
  Rng rng(seed);
  SelectionResult r;
  for (std::size_t g = 0; g < partition.num_groups(); ++g) {
    r.indices.push_back(partition.first(g) + uniform_index(rng, partition.group_size()));
  }
  r.log_det = companion_log_det(companion, r.indices);
  r.method = Method::random;
  r.elapsed = seconds_since(t0);
  return r;
}

}  // namespace pdpp
