#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pdpp/error.hpp"
#include "pdpp/kernel.hpp"

using namespace pdpp;

namespace {

SymMatrix rows(std::vector<std::vector<double>> r) { return SymMatrix::from_rows(r); }

}  // namespace

TEST_CASE("cosine similarity examples") {
  auto same = cosine_similarity(EmbeddingSet::from_rows({{1, 2}, {1, 2}}));
  CHECK(same(0, 1) == doctest::Approx(1.0));
  CHECK(same(0, 0) == doctest::Approx(1.0));

  auto ortho = cosine_similarity(EmbeddingSet::from_rows({{1, 0}, {0, 1}}));
  CHECK(ortho(0, 1) == doctest::Approx(0.0));
  CHECK(ortho(1, 1) == doctest::Approx(1.0));

  auto diag = cosine_similarity(EmbeddingSet::from_rows({{1, 0}, {1, 1}}));
  CHECK(diag(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)));

  CHECK_THROWS_AS(cosine_similarity(EmbeddingSet::from_rows({{1, 0}, {0, 0}})), InvalidInput);
}

TEST_CASE("rbf similarity examples") {
  auto e = EmbeddingSet::from_rows({{0.3, -1.2}, {2.0, 0.5}, {-1.0, 4.0}});
  auto limit = rbf_similarity(e, 1e-12);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(limit(i, j) >= 1.0 - 1e-6);

  auto unit = rbf_similarity(EmbeddingSet::from_rows({{0, 0}, {1, 0}}), 1.0);
  CHECK(unit(0, 1) == doctest::Approx(std::exp(-1.0)));

  auto same = rbf_similarity(EmbeddingSet::from_rows({{2, 3}, {2, 3}}), 5.0);
  CHECK(same(0, 1) == doctest::Approx(1.0));

  CHECK_THROWS_AS(rbf_similarity(e, 0.0), InvalidInput);
  CHECK_THROWS_AS(rbf_similarity(e, -1.0), InvalidInput);
}

TEST_CASE("resolve_gamma rules") {
  auto e = EmbeddingSet::from_rows({{0, 0}, {1, 0}, {0, 2}});
  CHECK(resolve_gamma(e, GammaRule::inverse_dim) == doctest::Approx(0.5));
  // Pairwise squared distances 1, 4, 5: median 4.
  CHECK(resolve_gamma(e, GammaRule::median) == doctest::Approx(0.25));
  auto flat = EmbeddingSet::from_rows({{1, 1, 1}, {1, 1, 1}});
  CHECK(resolve_gamma(flat, GammaRule::median) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("additive kernel examples") {
  Partition p(1, 2);
  SimilarityMatrix k(rows({{1, 0.5}, {0.5, 1}}));

  auto zero = additive_kernel(QualityVector({1.0, 2.0}), k, 0.0, p);
  CHECK(zero.kernel() == SymMatrix::diagonal(std::vector<double>{1.0, 2.0}));

  SimilarityMatrix id(SymMatrix::identity(2));
  auto l = additive_kernel(QualityVector({1.0, 1.0}), id, 2.0, p);
  CHECK(l.kernel() == rows({{3, 0}, {0, 3}}));

  auto m = additive_kernel(QualityVector({1.0, 2.0}), k, 2.0, p);
  CHECK(m.kernel() == rows({{3, 1}, {1, 4}}));
  CHECK(m.beta() == 2.0);
  CHECK(m.variant() == KernelVariant::additive);

  CHECK_THROWS_AS(additive_kernel(QualityVector({-1.0, 2.0}), k, 1.0, p), InvalidInput);
  CHECK_THROWS_AS(additive_kernel(QualityVector({1.0, 2.0}), k, -1.0, p), InvalidInput);
  CHECK_THROWS_AS(additive_kernel(QualityVector({1.0}), k, 1.0, p), InvalidInput);
}

TEST_CASE("multiplicative kernel examples") {
  Partition p(2, 1);
  const double beta = 1.7;
  SimilarityMatrix id(SymMatrix::identity(2));
  auto l = multiplicative_kernel(QualityVector({0.4, -0.3}), id, beta, p);
  CHECK(l.kernel()(0, 0) == doctest::Approx(std::exp(2 * 0.4 / beta)));
  CHECK(l.kernel()(1, 1) == doctest::Approx(std::exp(2 * -0.3 / beta)));
  CHECK(l.kernel()(0, 1) == 0.0);

  SimilarityMatrix k(rows({{1, 0.5}, {0.5, 1}}));
  auto same = multiplicative_kernel(QualityVector({0.0, 0.0}), k, beta, p);
  CHECK(same.kernel() == k.matrix());

  auto m = multiplicative_kernel(QualityVector({beta * std::numbers::ln2, 0.0}), k, beta, p);
  CHECK(m.kernel()(0, 0) == doctest::Approx(4.0));
  CHECK(m.kernel()(0, 1) == doctest::Approx(1.0));
  CHECK(m.kernel()(1, 1) == doctest::Approx(1.0));

  CHECK_THROWS_AS(multiplicative_kernel(QualityVector({0.0, 0.0}), k, 0.0, p), InvalidInput);
  CHECK_THROWS_AS(multiplicative_kernel(QualityVector({800.0, 0.0}), k, 1.0, p), RangeError);
}

TEST_CASE("quality shift keeps ranking and is strictly positive") {
  QualityVector q({-2.0, 0.5, -1.0});
  auto s = q.shifted_nonnegative();
  CHECK(s[0] == doctest::Approx(kQualityShiftEpsilon));
  CHECK(s[1] == doctest::Approx(2.5 + kQualityShiftEpsilon));
  CHECK(s[2] > s[0]);
  CHECK(s[1] > s[2]);
  CHECK_THROWS_AS(QualityVector({1.0, std::nan("")}), InvalidInput);
}

TEST_CASE("partition transversal check") {
  Partition p(3, 2);
  CHECK(p.size() == 6);
  CHECK(p.group(5) == 2);
  CHECK(p.first(1) == 2);
  CHECK(p.is_transversal(std::vector<std::size_t>{0, 3, 4}));
  CHECK(p.is_transversal(std::vector<std::size_t>{5, 1, 2}));
  CHECK_FALSE(p.is_transversal(std::vector<std::size_t>{0, 1, 4}));
  CHECK_FALSE(p.is_transversal(std::vector<std::size_t>{0, 3}));
  CHECK_FALSE(p.is_transversal(std::vector<std::size_t>{0, 3, 6}));
  CHECK_THROWS_AS(Partition(0, 2), InvalidInput);
}

TEST_CASE("LEnsemble validation") {
  CHECK_THROWS_AS(LEnsemble(SymMatrix::identity(4), Partition(3, 1),
                            KernelVariant::additive, 1.0),
                  InvalidInput);
  CHECK_THROWS_AS(LEnsemble(rows({{1, 2}, {2, 1}}), Partition(2, 1),
                            KernelVariant::additive, 1.0),
                  InvalidInput);
  LEnsemble l(rows({{2, 1}, {1, 2}}), Partition(2, 1), KernelVariant::additive, 1.0);
  CHECK(l.scaled(3.0).kernel()(0, 1) == 3.0);
  CHECK_THROWS_AS(l.scaled(0.0), InvalidInput);
  CHECK(parse_kernel_variant("multiplicative") == KernelVariant::multiplicative);
  CHECK(to_string(KernelVariant::additive) == "additive");
  CHECK_THROWS_AS(parse_kernel_variant("mult"), InvalidInput);
}

TEST_CASE("synthetic generator is deterministic and PSD") {
  SyntheticKernelConfig cfg;
  cfg.k = 4;
  cfg.w = 3;
  cfg.embed_dim = 5;
  cfg.seed = 99;
  auto a = generate_synthetic(cfg);
  auto b = generate_synthetic(cfg);
  CHECK(a.ensemble.kernel() == b.ensemble.kernel());
  cfg.seed = 100;
  CHECK_FALSE(generate_synthetic(cfg).ensemble.kernel() == a.ensemble.kernel());

  cfg.beta = 0.0;
  auto diag = generate_synthetic(cfg).ensemble.kernel();
  for (std::size_t i = 0; i < diag.dim(); ++i)
    for (std::size_t j = 0; j < diag.dim(); ++j)
      if (i != j) CHECK(diag(i, j) == 0.0);

  SyntheticKernelConfig big;
  big.seed = 7;
  auto inst = generate_synthetic(big);
  CHECK(inst.ensemble.size() == 1024);
  CHECK(is_psd(inst.ensemble.kernel(), 1e-6));
  for (std::size_t i = 0; i < inst.quality.size(); ++i) CHECK(inst.quality[i] > 0.0);
}

TEST_CASE("synthetic config JSON is strict") {
  auto cfg = synthetic_config_from_json(R"({"k": 2, "w": 3, "seed": 5, "variant": "multiplicative"})");
  CHECK(cfg.k == 2);
  CHECK(cfg.w == 3);
  CHECK(cfg.seed == 5);
  CHECK(cfg.variant == KernelVariant::multiplicative);
  auto round = synthetic_config_from_json(synthetic_config_to_json(cfg));
  CHECK(round.k == cfg.k);
  CHECK(round.variant == cfg.variant);

  CHECK_THROWS_AS(synthetic_config_from_json(R"({"k": 2, "w": 3, "colour": 1})"), InvalidInput);
  CHECK_THROWS_AS(synthetic_config_from_json(R"({"k": 2})"), InvalidInput);
  CHECK_THROWS_AS(synthetic_config_from_json(R"({"k": "two", "w": 3})"), InvalidInput);
  try {
    synthetic_config_from_json(R"({"k": 2, "w": 3, "beta": "x"})");
    FAIL("expected InvalidInput");
  } catch (const InvalidInput& e) {
    CHECK(std::string(e.what()).find("beta") != std::string::npos);
  }
}
