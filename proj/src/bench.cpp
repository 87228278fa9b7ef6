#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "json_util.hpp"
#include "pdpp/bench.hpp"
#include "pdpp/error.hpp"
#include "pdpp/metrics.hpp"

namespace pdpp {
namespace {

using detail::Json;
using detail::ObjectReader;

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_short(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

bool ranked(const BenchConfig& cfg, Method m) {
  return m != Method::kdpp || cfg.include_kdpp_ranks;
}

SyntheticKernelConfig instance_config(const BenchConfig& cfg, std::size_t k, std::size_t w,
                                      double beta, std::uint64_t seed) {
  SyntheticKernelConfig s;
  s.k = k;
  s.w = w;
  s.embed_dim = cfg.embed_dim;
  s.beta = beta;
  s.quality_mean = cfg.quality_mean;
  s.quality_stddev = cfg.quality_stddev;
  s.embedding_cov_scale = cfg.embedding_cov_scale;
  s.seed = seed;
  s.variant = cfg.variant;
  return s;
}

SelectionResult run_method(const BenchConfig& cfg, Method m, const SyntheticInstance& inst,
                           std::uint64_t seed) {
  const LEnsemble& l = inst.ensemble;
  const Partition& p = l.partition();
  switch (m) {
    case Method::greedy_map: return greedy_map(l, p.num_groups(), true);
    case Method::greedy_map_multi: return greedy_map_multi_init(l, cfg.starts);
    case Method::divbs:
      return mmr_select(inst.quality, inst.similarity, p, cfg.alpha_div, true, &l);
    case Method::random: return random_transversal(p, derive_seed(seed, {1}), &l);
    case Method::kdpp: return kdpp_sample(l, p.num_groups(), derive_seed(seed, {2}));
    case Method::brute_force: return brute_force_map(l, p.num_groups(), true);
    case Method::topk: return topk_per_group(inst.quality, p, &l);
  }
  throw InvalidInput("unknown method");
}

struct Cell {
  std::size_t k, w;
  double beta;
};

}  // namespace

OutputFormat parse_output_format(std::string_view s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw InvalidInput("unknown output format '" + std::string(s) + "' (expected csv or json)");
}

void BenchConfig::validate() const {
  if (group_sizes.empty() || group_counts.empty() || betas.empty() || methods.empty()) {
    throw InvalidInput("group_sizes, group_counts, betas and methods must be non-empty");
  }
  if (trials == 0) throw InvalidInput("trials must be >= 1");
  if (threads == 0) throw InvalidInput("threads must be >= 1");
  for (std::size_t w : group_sizes) {
    if (w == 0) throw InvalidInput("group_sizes entries must be >= 1");
  }
  for (std::size_t k : group_counts) {
    if (k == 0) throw InvalidInput("group_counts entries must be >= 1");
  }
  for (double b : betas) {
    if (!std::isfinite(b) || b < 0.0) throw InvalidInput("betas must be finite and >= 0");
    if (variant == KernelVariant::multiplicative && b == 0.0) {
      throw InvalidInput("betas must be > 0 for the multiplicative kernel");
    }
  }
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (methods[i] == methods[j]) {
        throw InvalidInput("method '" + std::string(to_string(methods[i])) + "' is listed twice");
      }
    }
  }
  if (!(alpha_div >= 0.0)) throw InvalidInput("alpha_div must be >= 0");
  if (embed_dim == 0) throw InvalidInput("embed_dim must be >= 1");
  if (quality_stddev < 0.0 || embedding_cov_scale < 0.0) {
    throw InvalidInput("quality_stddev and embedding_cov_scale must be >= 0");
  }
  if (std::find(methods.begin(), methods.end(), Method::brute_force) != methods.end()) {
    for (std::size_t k : group_counts) {
      for (std::size_t w : group_sizes) {
        const double count = brute_force_count(Partition(k, w), k, true);
        if (count > kBruteForceCap) {
          throw InvalidInput("brute_force refused for k=" + std::to_string(k) + ", w=" +
                             std::to_string(w) + ": " + fmt(count) + " transversals exceed the cap of " +
                             fmt(kBruteForceCap));
        }
      }
    }
  }
}

BenchConfig bench_config_from_json(std::string_view json_text) {
  const Json j = detail::parse_json(json_text, "bench config");
  ObjectReader r(j, "config");
  BenchConfig cfg;
  auto sizes = [&](const std::string& key, std::vector<std::size_t>& out) {
    if (!r.has(key)) return;
    out.clear();
    for (std::uint64_t v : r.unsigned_ints(key)) out.push_back(static_cast<std::size_t>(v));
  };
  sizes("group_sizes", cfg.group_sizes);
  sizes("group_counts", cfg.group_counts);
  cfg.trials = r.unsigned_int("trials", cfg.trials);
  if (r.has("betas")) cfg.betas = r.numbers("betas");
  if (r.has("methods")) {
    cfg.methods.clear();
    const auto names = r.strings("methods");
    for (std::size_t i = 0; i < names.size(); ++i) {
      try {
        cfg.methods.push_back(parse_method(names[i]));
      } catch (const InvalidInput& e) {
        ObjectReader::fail(r.at("methods") + "[" + std::to_string(i) + "]", e.what());
      }
    }
  }
  cfg.seed = r.unsigned_int("seed", cfg.seed);
  cfg.output = r.string("output", cfg.output);
  if (r.has("format")) {
    try {
      cfg.format = parse_output_format(r.string("format"));
    } catch (const InvalidInput& e) {
      ObjectReader::fail(r.at("format"), e.what());
    }
  }
  cfg.threads = r.unsigned_int("threads", cfg.threads);
  cfg.include_kdpp_ranks = r.boolean("include_kdpp_ranks", cfg.include_kdpp_ranks);
  cfg.omit_timing = r.boolean("omit_timing", cfg.omit_timing);
  cfg.embed_dim = r.unsigned_int("embed_dim", cfg.embed_dim);
  cfg.quality_mean = r.number("quality_mean", cfg.quality_mean);
  cfg.quality_stddev = r.number("quality_stddev", cfg.quality_stddev);
  cfg.embedding_cov_scale = r.number("embedding_cov_scale", cfg.embedding_cov_scale);
  if (r.has("variant")) {
    try {
      cfg.variant = parse_kernel_variant(r.string("variant"));
    } catch (const InvalidInput& e) {
      ObjectReader::fail(r.at("variant"), e.what());
    }
  }
  cfg.alpha_div = r.number("alpha_div", cfg.alpha_div);
  if (r.has("multi_init_starts")) {
    const std::string s = r.string("multi_init_starts");
    if (s == "all_items") {
      cfg.starts = MultiInitStarts::all_items;
    } else if (s == "group_argmax") {
      cfg.starts = MultiInitStarts::group_argmax;
    } else {
      ObjectReader::fail(r.at("multi_init_starts"), "expected all_items or group_argmax");
    }
  }
  r.finish();
  cfg.validate();
  return cfg;
}

std::uint64_t trial_seed(std::uint64_t base, std::size_t k, std::size_t w, double beta,
                         std::size_t trial) {
  return derive_seed(base, {k, w, double_bits(beta), trial});
}

BenchResult run_bench(const BenchConfig& cfg) {
  cfg.validate();

  std::vector<Cell> cells;
  for (std::size_t k : cfg.group_counts) {
    for (std::size_t w : cfg.group_sizes) {
      for (double beta : cfg.betas) cells.push_back({k, w, beta});
    }
  }

  // Untimed warm-up of every method on the largest configuration.
  {
    const Cell big = *std::max_element(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
      return a.k * a.w < b.k * b.w;
    });
    const std::uint64_t seed = trial_seed(cfg.seed, big.k, big.w, big.beta, 0);
    const SyntheticInstance inst = generate_synthetic(instance_config(cfg, big.k, big.w, big.beta, seed));
    for (Method m : cfg.methods) (void)run_method(cfg, m, inst, seed);
  }

  const std::size_t nm = cfg.methods.size();
  const std::size_t tasks = cells.size() * cfg.trials;
  std::vector<BenchRecord> records(tasks * nm);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= tasks) return;
      try {
        const Cell& c = cells[task / cfg.trials];
        const std::size_t trial = task % cfg.trials;
        const std::uint64_t seed = trial_seed(cfg.seed, c.k, c.w, c.beta, trial);
        const SyntheticInstance inst = generate_synthetic(instance_config(cfg, c.k, c.w, c.beta, seed));
        for (std::size_t mi = 0; mi < nm; ++mi) {
          const SelectionResult sel = run_method(cfg, cfg.methods[mi], inst, seed);
          BenchRecord& rec = records[task * nm + mi];
          rec.method = cfg.methods[mi];
          rec.k = c.k;
          rec.w = c.w;
          rec.beta = c.beta;
          rec.trial = trial;
          rec.seed = seed;
          rec.log_det = sel.log_det;
          rec.elapsed = sel.elapsed;
          rec.transversal = inst.ensemble.partition().is_transversal(sel.indices);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(tasks);
        return;
      }
    }
  };
  const std::size_t nthreads = std::min(cfg.threads, tasks);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Per-cell normalisation over the ranked methods.
  std::vector<std::size_t> ranked_idx;
  for (std::size_t mi = 0; mi < nm; ++mi) {
    if (ranked(cfg, cfg.methods[mi])) ranked_idx.push_back(mi);
  }

  BenchResult out;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const std::size_t base = ci * cfg.trials;
    if (ranked_idx.size() >= 2) {
      std::vector<std::vector<double>> values(ranked_idx.size(), std::vector<double>(cfg.trials));
      for (std::size_t r = 0; r < ranked_idx.size(); ++r) {
        for (std::size_t t = 0; t < cfg.trials; ++t) {
          values[r][t] = records[(base + t) * nm + ranked_idx[r]].log_det;
        }
      }
      const BenchmarkStats st = benchmark_stats(values);
      for (std::size_t r = 0; r < ranked_idx.size(); ++r) {
        for (std::size_t t = 0; t < cfg.trials; ++t) {
          BenchRecord& rec = records[(base + t) * nm + ranked_idx[r]];
          rec.normalized = st.z[r][t];
          rec.rank = st.rank[r][t];
        }
      }
    } else if (ranked_idx.size() == 1) {
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        BenchRecord& rec = records[(base + t) * nm + ranked_idx[0]];
        rec.normalized = 0.0;
        rec.rank = 1.0;
      }
    }

    for (std::size_t mi = 0; mi < nm; ++mi) {
      BenchSummaryRow row;
      row.method = cfg.methods[mi];
      row.k = cells[ci].k;
      row.w = cells[ci].w;
      row.beta = cells[ci].beta;
      double z = 0.0, rank = 0.0;
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        const BenchRecord& rec = records[(base + t) * nm + mi];
        row.mean_log_det += rec.log_det;
        row.mean_elapsed += rec.elapsed;
        if (rec.normalized) z += *rec.normalized;
        if (rec.rank) rank += *rec.rank;
      }
      const double n = static_cast<double>(cfg.trials);
      row.mean_log_det /= n;
      row.mean_elapsed /= n;
      if (ranked(cfg, row.method)) {
        row.mean_normalized = z / n;
        row.mean_rank = rank / n;
      }
      out.summary.push_back(row);
    }
  }
  out.records = std::move(records);
  return out;
}

void write_csv(std::ostream& os, const BenchResult& r, bool omit_timing) {
  os << "method,k,w,beta,trial,seed,log_det,elapsed_s,normalized_value,rank,transversal\n";
  for (const BenchRecord& rec : r.records) {
    os << to_string(rec.method) << ',' << rec.k << ',' << rec.w << ',' << fmt(rec.beta) << ','
       << rec.trial << ',' << rec.seed << ',' << fmt(rec.log_det) << ','
       << (omit_timing ? std::string() : fmt(rec.elapsed)) << ','
       << (rec.normalized ? fmt(*rec.normalized) : std::string()) << ','
       << (rec.rank ? fmt(*rec.rank) : std::string()) << ',' << (rec.transversal ? 1 : 0)
       << '\n';
  }
}

void write_json(std::ostream& os, const BenchResult& r, bool omit_timing) {
  Json records = Json::array();
  for (const BenchRecord& rec : r.records) {
    records.push_back({
        {"method", std::string(to_string(rec.method))},
        {"k", rec.k},
        {"w", rec.w},
        {"beta", rec.beta},
        {"trial", rec.trial},
        {"seed", rec.seed},
        {"log_det", finite_or_null(rec.log_det)},
        {"elapsed_s", omit_timing ? Json(nullptr) : Json(rec.elapsed)},
        {"normalized_value", rec.normalized ? Json(*rec.normalized) : Json(nullptr)},
        {"rank", rec.rank ? Json(*rec.rank) : Json(nullptr)},
        {"transversal", rec.transversal},
    });
  }
  Json summary = Json::array();
  for (const BenchSummaryRow& row : r.summary) {
    summary.push_back({
        {"method", std::string(to_string(row.method))},
        {"k", row.k},
        {"w", row.w},
        {"beta", row.beta},
        {"mean_log_det", finite_or_null(row.mean_log_det)},
        {"mean_normalized_value", row.mean_normalized ? Json(*row.mean_normalized) : Json(nullptr)},
        {"mean_rank", row.mean_rank ? Json(*row.mean_rank) : Json(nullptr)},
        {"mean_elapsed_s", omit_timing ? Json(nullptr) : Json(row.mean_elapsed)},
    });
  }
  os << Json{{"records", records}, {"summary", summary}}.dump(2) << '\n';
}

void write_summary_table(std::ostream& os, const BenchResult& r, bool omit_timing) {
  char line[200];
  std::snprintf(line, sizeof line, "%-18s %5s %5s %10s %12s %10s %10s\n", "method", "k", "w",
                "beta", "norm_value", "avg_rank", "time_s");
  os << line;
  for (const BenchSummaryRow& row : r.summary) {
    std::snprintf(line, sizeof line, "%-18s %5zu %5zu %10s %12s %10s %10s\n",
                  std::string(to_string(row.method)).c_str(), row.k, row.w,
                  fmt_short(row.beta).c_str(),
                  row.mean_normalized ? fmt_short(*row.mean_normalized).c_str() : "-",
                  row.mean_rank ? fmt_short(*row.mean_rank).c_str() : "-",
                  omit_timing ? "-" : fmt_short(row.mean_elapsed).c_str());
    os << line;
  }
}

}  // namespace pdpp
