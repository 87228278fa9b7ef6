#pragma once

// Synthetic-kernel benchmark sweep: for every (k, w, beta, trial) one kernel
// is generated and every requested selector runs on it. Values are compared
// per trial by z-score and rank.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pdpp/kernel.hpp"
#include "pdpp/selection.hpp"

namespace pdpp {

enum class OutputFormat { csv, json };

OutputFormat parse_output_format(std::string_view s);

struct BenchConfig {
  std::vector<std::size_t> group_sizes{32};   // w
  std::vector<std::size_t> group_counts{32};  // k
  std::size_t trials = 500;
  std::vector<double> betas{1.0};
  std::vector<Method> methods{Method::greedy_map_multi, Method::divbs, Method::random};
  std::uint64_t seed = 0;
  std::string output;  // empty: no record file
  OutputFormat format = OutputFormat::csv;
  std::size_t threads = 1;
  bool include_kdpp_ranks = false;
  bool omit_timing = false;  // blank out elapsed times for byte-stable output

  // Synthetic instance statistics shared by every configuration.
  std::size_t embed_dim = 64;
  double quality_mean = 0.0;
  double quality_stddev = 1.0;
  double embedding_cov_scale = 1.0;
  KernelVariant variant = KernelVariant::additive;

  double alpha_div = 1.0;  // divbs penalty weight
  MultiInitStarts starts = MultiInitStarts::all_items;

  /// Throws InvalidInput, naming the configuration for infeasible
  /// brute-force requests.
  void validate() const;
};

/// Strict JSON loading with the BenchConfig field names.
BenchConfig bench_config_from_json(std::string_view json_text);

/// Seed of the kernel for one (k, w, beta, trial) cell.
std::uint64_t trial_seed(std::uint64_t base, std::size_t k, std::size_t w, double beta,
                         std::size_t trial);

struct BenchRecord {
  Method method = Method::greedy_map;
  std::size_t k = 0;
  std::size_t w = 0;
  double beta = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double log_det = 0.0;
  double elapsed = 0.0;
  bool transversal = false;
  std::optional<double> normalized;  // empty when excluded from ranking
  std::optional<double> rank;
};

struct BenchSummaryRow {
  Method method = Method::greedy_map;
  std::size_t k = 0;
  std::size_t w = 0;
  double beta = 0.0;
  double mean_log_det = 0.0;
  std::optional<double> mean_normalized;
  std::optional<double> mean_rank;
  double mean_elapsed = 0.0;
};

struct BenchResult {
  std::vector<BenchRecord> records;  // sorted by (k, w, beta, trial, method order)
  std::vector<BenchSummaryRow> summary;
};

BenchResult run_bench(const BenchConfig& cfg);

/// Fixed CSV columns:
/// method,k,w,beta,trial,seed,log_det,elapsed_s,normalized_value,rank,transversal
void write_csv(std::ostream& os, const BenchResult& r, bool omit_timing);
/// Document with "records" and "summary" arrays (schema in schemas/).
void write_json(std::ostream& os, const BenchResult& r, bool omit_timing);
/// Human-readable per-configuration table.
void write_summary_table(std::ostream& os, const BenchResult& r, bool omit_timing);

}  // namespace pdpp
