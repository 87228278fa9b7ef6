#include <doctest.h>
#include <algorithm>

#include <set>
#include <sstream>

#include <json.hpp>

#include "pdpp/bench.hpp"
#include "pdpp/error.hpp"

using namespace pdpp;

namespace {

BenchConfig tiny() {
  BenchConfig cfg;
  cfg.group_counts = {3};
  cfg.group_sizes = {3};
  cfg.trials = 4;
  cfg.embed_dim = 8;
  cfg.seed = 11;
  return cfg;
}

std::string csv(const BenchResult& r) {
  std::ostringstream os;
  write_csv(os, r, true);
  return os.str();
}

}  // namespace

TEST_CASE("single random method: records are transversal and ranks are 1") {
  BenchConfig cfg;
  cfg.group_counts = {2};
  cfg.group_sizes = {2};
  cfg.trials = 3;
  cfg.methods = {Method::random};
  auto r = run_bench(cfg);
  REQUIRE(r.records.size() == 3);
  for (const auto& rec : r.records) {
    CHECK(rec.transversal);
    CHECK(*rec.rank == 1.0);
    CHECK(*rec.normalized == 0.0);
  }
  REQUIRE(r.summary.size() == 1);
  CHECK(*r.summary[0].mean_rank == 1.0);
}

TEST_CASE("records cover every cell and method in order") {
  BenchConfig cfg = tiny();
  cfg.group_counts = {2, 3};
  cfg.betas = {0.5, 2.0};
  cfg.methods = {Method::greedy_map_multi, Method::brute_force, Method::topk};
  auto r = run_bench(cfg);
  CHECK(r.records.size() == 2 * 2 * 4 * 3);
  CHECK(r.summary.size() == 2 * 2 * 3);
  for (std::size_t i = 0; i < r.records.size(); i += 3) {
    const auto& g = r.records[i];
    const auto& bf = r.records[i + 1];
    CHECK(g.method == Method::greedy_map_multi);
    CHECK(bf.method == Method::brute_force);
    CHECK(g.seed == bf.seed);
    CHECK(g.seed == trial_seed(cfg.seed, g.k, g.w, g.beta, g.trial));
    CHECK(g.log_det <= bf.log_det + 1e-10);
    if (bf.log_det > g.log_det + 1e-9) CHECK(*bf.rank < *g.rank);
  }
}

TEST_CASE("identical seeds give identical output") {
  BenchConfig cfg = tiny();
  cfg.methods = {Method::greedy_map, Method::divbs, Method::random, Method::kdpp};
  const std::string a = csv(run_bench(cfg));
  CHECK(a == csv(run_bench(cfg)));
  cfg.threads = 3;
  CHECK(a == csv(run_bench(cfg)));
  cfg.seed = 12;
  CHECK(a != csv(run_bench(cfg)));
}

TEST_CASE("kdpp is unranked unless requested") {
  BenchConfig cfg = tiny();
  cfg.methods = {Method::greedy_map, Method::kdpp};
  auto r = run_bench(cfg);
  for (const auto& rec : r.records) {
    if (rec.method == Method::kdpp) {
      CHECK_FALSE(rec.rank.has_value());
    } else {
      CHECK(*rec.rank == 1.0);
    }
  }
  cfg.include_kdpp_ranks = true;
  for (const auto& rec : run_bench(cfg).records) CHECK(rec.rank.has_value());
}

TEST_CASE("CSV layout") {
  BenchConfig cfg = tiny();
  cfg.trials = 1;
  cfg.methods = {Method::topk, Method::random};
  auto r = run_bench(cfg);
  std::ostringstream timed;
  write_csv(timed, r, false);
  std::istringstream lines(timed.str());
  std::string header, row;
  std::getline(lines, header);
  CHECK(header ==
        "method,k,w,beta,trial,seed,log_det,elapsed_s,normalized_value,rank,transversal");
  std::getline(lines, row);
  CHECK(row.rfind("topk,3,3,1,0,", 0) == 0);
  CHECK(std::count(row.begin(), row.end(), ',') == 10);
  CHECK(csv(r).find(",,") != std::string::npos);  // blank elapsed column
}

TEST_CASE("JSON output has records and summary") {
  BenchConfig cfg = tiny();
  cfg.trials = 2;
  cfg.methods = {Method::topk, Method::kdpp};
  std::ostringstream os;
  write_json(os, run_bench(cfg), true);
  const auto doc = nlohmann::json::parse(os.str());
  REQUIRE(doc.at("records").size() == 4);
  REQUIRE(doc.at("summary").size() == 2);
  CHECK(doc["records"][0]["elapsed_s"].is_null());
  CHECK(doc["records"][0]["method"] == "topk");
  CHECK(doc["records"][0]["rank"] == 1.0);
  CHECK(doc["records"][1]["rank"].is_null());
  CHECK(doc["records"][1]["transversal"].is_boolean());
  CHECK(doc["summary"][0]["mean_elapsed_s"].is_null());
}

TEST_CASE("config validation") {
  BenchConfig cfg;
  cfg.methods = {Method::brute_force};
  try {
    cfg.validate();
    FAIL("expected refusal");
  } catch (const InvalidInput& e) {
    const std::string msg = e.what();
    CHECK(msg.find("k=32") != std::string::npos);
    CHECK(msg.find("w=32") != std::string::npos);
  }
  cfg = BenchConfig{};
  cfg.methods = {Method::random, Method::random};
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg = BenchConfig{};
  cfg.trials = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  CHECK_NOTHROW(BenchConfig{}.validate());
}

TEST_CASE("config JSON is strict") {
  auto cfg = bench_config_from_json(R"({
    "group_sizes": [4], "group_counts": [2, 3], "trials": 7, "betas": [1, 10],
    "methods": ["greedy_map_multi", "mmr", "random"], "seed": 5, "format": "json",
    "threads": 2, "include_kdpp_ranks": true, "omit_timing": true, "embed_dim": 16
  })");
  CHECK(cfg.group_counts == std::vector<std::size_t>{2, 3});
  CHECK(cfg.trials == 7);
  CHECK(cfg.methods[1] == Method::divbs);
  CHECK(cfg.format == OutputFormat::json);
  CHECK(cfg.include_kdpp_ranks);
  CHECK(cfg.embed_dim == 16);
  CHECK_THROWS_AS(bench_config_from_json(R"({"trails": 5})"), InvalidInput);
  CHECK_THROWS_AS(bench_config_from_json(R"({"methods": ["best"]})"), InvalidInput);
  CHECK_THROWS_AS(bench_config_from_json(R"({"trials": "many"})"), InvalidInput);
  CHECK_THROWS_AS(parse_output_format("xml"), InvalidInput);
}

TEST_CASE("trial seeds differ across cells") {
  std::set<std::uint64_t> seen;
  for (std::size_t t = 0; t < 50; ++t)
    for (double beta : {0.1, 1.0})
      for (std::size_t k : {2, 3}) seen.insert(trial_seed(0, k, 4, beta, t));
  CHECK(seen.size() == 200);
}
