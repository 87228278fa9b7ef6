// pdpp: benchmark sweeps, toy diffusion decoding and verification suites.
//
// Exit codes: 0 success, 1 validation or usage error, 2 verification failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pdpp/bench.hpp"
#include "pdpp/diffusion.hpp"
#include "pdpp/error.hpp"
#include "pdpp/report.hpp"
#include "pdpp/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitVerifyFailed = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pdpp::InvalidInput("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw pdpp::InvalidInput("cannot write '" + path + "'");
  out << text;
  if (!out) throw pdpp::InvalidInput("failed writing '" + path + "'");
}

std::vector<pdpp::Method> parse_methods(const std::string& list) {
  std::vector<pdpp::Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(pdpp::parse_method(item));
  }
  if (out.empty()) throw pdpp::InvalidInput("--methods needs at least one method");
  return out;
}

struct BenchArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string methods;
  std::string output;
  std::string format;
  std::optional<std::size_t> threads;
  bool include_kdpp_ranks = false;
  bool omit_timing = false;
};

int run_bench_command(const BenchArgs& a) {
  pdpp::BenchConfig cfg = a.config.empty() ? pdpp::BenchConfig{}
                                           : pdpp::bench_config_from_json(read_file(a.config));
  if (a.seed) cfg.seed = *a.seed;
  if (a.trials) cfg.trials = *a.trials;
  if (!a.methods.empty()) cfg.methods = parse_methods(a.methods);
  if (!a.output.empty()) cfg.output = a.output;
  if (!a.format.empty()) cfg.format = pdpp::parse_output_format(a.format);
  if (a.threads) cfg.threads = *a.threads;
  if (a.include_kdpp_ranks) cfg.include_kdpp_ranks = true;
  if (a.omit_timing) cfg.omit_timing = true;
  cfg.validate();

  const pdpp::BenchResult r = pdpp::run_bench(cfg);
  if (!cfg.output.empty()) {
    std::ostringstream os;
    if (cfg.format == pdpp::OutputFormat::csv) {
      pdpp::write_csv(os, r, cfg.omit_timing);
    } else {
      pdpp::write_json(os, r, cfg.omit_timing);
    }
    write_file(cfg.output, os.str());
  }
  pdpp::write_summary_table(std::cout, r, cfg.omit_timing);
  return kExitOk;
}

struct DecodeArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string output;
};

int run_decode_command(const DecodeArgs& a) {
  pdpp::DecodeConfig cfg = pdpp::decode_config_from_json(read_file(a.config));
  if (a.seed) cfg.seed = *a.seed;
  const pdpp::OracleDenoiser model = cfg.model.build(cfg.length);
  const pdpp::DecodeResult result = pdpp::decode(model, cfg);
  std::cout << pdpp::decode_report(model, cfg, result);
  if (!cfg.sweep_betas.empty()) {
    std::cout << pdpp::sweep_report(
        pdpp::run_beta_sweep(model, cfg, cfg.sweep_betas, cfg.sweep_seeds));
  }
  if (!a.output.empty()) write_file(a.output, pdpp::trace_to_json(result));
  return kExitOk;
}

struct VerifyArgs {
  std::string format = "text";
  std::string output;
  std::string inject_fault;
};

int run_verify_command(const VerifyArgs& a) {
  pdpp::VerifyOptions opts;
  if (!a.inject_fault.empty()) {
    if (a.inject_fault != "asymmetric-kernel") {
      throw pdpp::InvalidInput("unknown fault '" + a.inject_fault + "' (expected asymmetric-kernel)");
    }
    opts.inject_asymmetric_kernel = true;
  }
  if (a.format != "text" && a.format != "json") {
    throw pdpp::InvalidInput("--format must be text or json for verify");
  }
  const pdpp::VerifyReport report = pdpp::run_verify(opts);
  std::cout << (a.format == "json" ? report.to_json() : report.to_text());
  if (!a.output.empty()) write_file(a.output, report.to_json());
  return report.passed() ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partition-constrained DPP selection: benchmarks, diffusion decoding, verification"};
  app.require_subcommand(1);

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Synthetic-kernel selector benchmark sweep");
  b->add_option("--config", bench.config, "BenchConfig JSON file");
  b->add_option("--seed", bench.seed, "Base seed");
  b->add_option("--trials", bench.trials, "Trials per configuration");
  b->add_option("--methods", bench.methods, "Comma-separated methods");
  b->add_option("--output", bench.output, "Record file path");
  b->add_option("--format", bench.format, "Record format: csv or json");
  b->add_option("--threads", bench.threads, "Worker threads (1 for clean timings)");
  b->add_flag("--include-kdpp-ranks", bench.include_kdpp_ranks, "Rank the k-DPP sampler too");
  b->add_flag("--omit-timing", bench.omit_timing, "Leave elapsed times blank");

  DecodeArgs dec;
  auto* d = app.add_subcommand("decode", "Toy diffusion beam decoding with a metric report");
  d->add_option("--config", dec.config, "DecodeConfig JSON file")->required();
  d->add_option("--seed", dec.seed, "Override config seed");
  d->add_option("--output", dec.output, "Write the trace JSON here");

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Run the oracle and invariant suites");
  v->add_option("--format", ver.format, "Report format: text or json");
  v->add_option("--output", ver.output, "Also write the JSON summary here");
  v->add_option("--inject-fault", ver.inject_fault, "Negative control: asymmetric-kernel");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (b->parsed()) return run_bench_command(bench);
    if (d->parsed()) return run_decode_command(dec);
    if (v->parsed()) return run_verify_command(ver);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}
