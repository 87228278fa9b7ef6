#include <chrono>
#include <cmath>
#include <limits>

#include "pdpp/error.hpp"
#include "pdpp/selection.hpp"
#include "pdpp/simd.hpp"

namespace pdpp {
namespace {

using Clock = std::chrono::steady_clock;

constexpr double kPruneMargin = 1e-9;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Scratch buffers reused across trajectories of one multi-init run.
struct Workspace {
  std::size_t n = 0;
  std::size_t capacity = 0;
  std::vector<double> history;  // panel-major, see simd::history_index
  std::vector<double> d2;
  std::vector<double> coeffs;
  std::vector<char> group_used;

  Workspace(std::size_t n_items, std::size_t k, std::size_t groups)
      : n(n_items), capacity(k), history(simd::history_size(n_items, k)), d2(n_items),
        coeffs(k), group_used(groups) {}
};

struct Trajectory {
  std::vector<std::size_t> indices;
  std::vector<double> gains;
  double total = 0.0;
  bool complete = false;
  bool pruned = false;
};

// Eligible candidates as maximal runs of consecutive indices.
template <class F>
void for_each_eligible_run(const Partition& p, bool constrained, const Workspace& ws, F&& f) {
  if (!constrained) {
    f(std::size_t{0}, ws.n);
    return;
  }
  const std::size_t w = p.group_size();
  std::size_t g = 0;
  while (g < p.num_groups()) {
    if (ws.group_used[g]) {
      ++g;
      continue;
    }
    std::size_t h = g;
    while (h < p.num_groups() && !ws.group_used[h]) ++h;
    f(g * w, h * w);
    g = h;
  }
}

// Argmax of d2 over eligible candidates above the floor; n when none.
// Picked items have d2 = 0 and so never clear the floor.
std::size_t pick_next(const Partition& p, bool constrained, const Workspace& ws,
                      const simd::KernelTable& kt) {
  std::size_t best = ws.n;
  double best_d2 = kMarginalFloor;
  for_each_eligible_run(p, constrained, ws, [&](std::size_t begin, std::size_t end) {
    const std::size_t i = begin + kt.argmax_above(ws.d2.data() + begin, end - begin, best_d2);
    if (i < end) {
      best_d2 = ws.d2[i];
      best = i;
    }
  });
  return best;
}

Trajectory run_trajectory(const SymMatrix& l, const Partition& p, std::size_t k,
                          bool constrained, std::optional<std::size_t> start, Workspace& ws,
                          GreedyTrace* trace,
                          double prune_below = -std::numeric_limits<double>::infinity()) {
  const std::size_t n = ws.n;
  const auto& simd_kernels = simd::kernels();
  for (std::size_t i = 0; i < n; ++i) ws.d2[i] = l(i, i);
  std::fill(ws.group_used.begin(), ws.group_used.end(), 0);
  if (trace) trace->marginals.push_back(ws.d2);

  Trajectory out;
  out.indices.reserve(k);
  out.gains.reserve(k);

  std::size_t j;
  if (start) {
    j = *start;
    if (!(ws.d2[j] > kMarginalFloor)) return out;
  } else {
    j = pick_next(p, constrained, ws, simd_kernels);
    if (j == n) return out;
    // Residuals never grow, so every remaining gain is at most log d2[j].
    const double remaining = static_cast<double>(k - out.indices.size());
    if (out.total + remaining * std::log(ws.d2[j]) < prune_below) {
      out.pruned = true;
      return out;
    }
  }

  for (std::size_t t = 0;; ++t) {
    const double gain = std::log(ws.d2[j]);
    out.indices.push_back(j);
    out.gains.push_back(gain);
    out.total += gain;
    ws.group_used[p.group(j)] = 1;
    if (out.indices.size() == k) break;

    for (std::size_t s = 0; s < t; ++s) {
      ws.coeffs[s] = ws.history[simd::history_index(s, j, ws.capacity)];
    }
    simd::ProjectUpdate args{
        .pivot_row = l.row(j).data(),
        .history = ws.history.data(),
        .capacity = ws.capacity,
        .depth = t,
        .coeffs = ws.coeffs.data(),
        .inv_pivot = 1.0 / std::sqrt(ws.d2[j]),
        .d2 = ws.d2.data(),
        .begin = 0,
        .end = 0,
    };
    for_each_eligible_run(p, constrained, ws, [&](std::size_t begin, std::size_t end) {
      args.begin = begin;
      args.end = end;
      simd_kernels.project_update(args);
    });
    ws.d2[j] = 0.0;
    if (trace) trace->marginals.push_back(ws.d2);

    j = pick_next(p, constrained, ws, simd_kernels);
    if (j == n) return out;
    // Residuals never grow, so every remaining gain is at most log d2[j].
    const double remaining = static_cast<double>(k - out.indices.size());
    if (out.total + remaining * std::log(ws.d2[j]) < prune_below) {
      out.pruned = true;
      return out;
    }
  }
  out.complete = true;
  return out;
}

void check_request(const LEnsemble& l, std::size_t k, bool constrained) {
  if (k == 0) throw InvalidInput("selection size k must be >= 1");
  const Partition& p = l.partition();
  if (constrained && k > p.num_groups()) {
    throw InvalidInput("cannot pick " + std::to_string(k) + " items one per group from " +
                       std::to_string(p.num_groups()) + " groups");
  }
  if (k > l.size()) {
    throw InvalidInput("cannot pick " + std::to_string(k) + " items from " +
                       std::to_string(l.size()));
  }
}

}  // namespace

SelectionResult greedy_map(const LEnsemble& l, std::size_t k, bool constrained,
                           std::optional<std::size_t> init, GreedyTrace* trace) {
  const auto t0 = Clock::now();
  check_request(l, k, constrained);
  if (init && *init >= l.size()) {
    throw InvalidInput("forced start index " + std::to_string(*init) + " is out of range");
  }
  const Partition& p = l.partition();
  Workspace ws(l.size(), k, p.num_groups());
  Trajectory tr = run_trajectory(l.kernel(), p, k, constrained, init, ws, trace);
  if (!tr.complete) throw RankDeficient(tr.indices.size(), k);

  SelectionResult r;
  r.indices = std::move(tr.indices);
  r.marginal_gains = std::move(tr.gains);
  r.log_det = tr.total;
  r.method = Method::greedy_map;
  r.elapsed = seconds_since(t0);
  return r;
}

SelectionResult greedy_map_multi_init(const LEnsemble& l, MultiInitStarts starts) {
  const auto t0 = Clock::now();
  const Partition& p = l.partition();
  const std::size_t k = p.num_groups();
  const SymMatrix& kernel = l.kernel();

  std::vector<std::size_t> start_items;
  if (starts == MultiInitStarts::all_items) {
    start_items.resize(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) start_items[i] = i;
  } else {
    for (std::size_t g = 0; g < k; ++g) {
      std::size_t best = p.first(g);
      for (std::size_t i = best + 1; i < p.first(g) + p.group_size(); ++i) {
        if (kernel(i, i) > kernel(best, best)) best = i;
      }
      start_items.push_back(best);
    }
  }

  Workspace ws(l.size(), k, k);
  Trajectory best;
  std::size_t deepest = 0;
  bool found = false;
  for (std::size_t b : start_items) {
    // The margin keeps rounding in the bound from discarding a tie.
    const double floor =
        found ? best.total - kPruneMargin * std::max(1.0, std::abs(best.total))
              : -std::numeric_limits<double>::infinity();
    Trajectory tr = run_trajectory(kernel, p, k, true, b, ws, nullptr, floor);
    if (tr.pruned) continue;
    deepest = std::max(deepest, tr.indices.size());
    if (!tr.complete) continue;
    if (!found || tr.total > best.total) {
      best = std::move(tr);
      found = true;
    }
  }
  if (!found) throw RankDeficient(deepest, k);

  SelectionResult r;
  r.indices = std::move(best.indices);
  r.marginal_gains = std::move(best.gains);
  r.log_det = best.total;
  r.method = Method::greedy_map_multi;
  r.elapsed = seconds_since(t0);
  return r;
}

}  // namespace pdpp
