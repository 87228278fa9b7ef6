#include <algorithm>
#include <chrono>
#include <cmath>

#include "pdpp/error.hpp"
#include "pdpp/selection.hpp"

namespace pdpp {

namespace {
constexpr double kRankTolerance = 1e-10;  // relative to the largest eigenvalue
}

KdppSampler::KdppSampler(const SymMatrix& l, std::size_t k) : n_(l.dim()), k_(k), rank_(0) {
  if (k == 0) throw InvalidInput("k-DPP size k must be >= 1");
  EigenDecomposition eig = sym_eigendecompose(l);
  lambda_ = std::move(eig.values);
  vectors_ = std::move(eig.vectors);

  double top = 0.0;
  for (double& v : lambda_) {
    v = std::max(v, 0.0);
    top = std::max(top, v);
  }
  for (double& v : lambda_) {
    if (top > 0.0 && v > kRankTolerance * top) {
      ++rank_;
      v /= top;
    } else {
      v = 0.0;
    }
  }
  if (k > rank_) {
    throw InvalidInput("k-DPP size " + std::to_string(k) + " exceeds the numerical rank " +
                       std::to_string(rank_) + " of the kernel");
  }

  esp_.assign(k + 1, std::vector<double>(n_ + 1, 0.0));
  for (std::size_t m = 0; m <= n_; ++m) esp_[0][m] = 1.0;
  for (std::size_t j = 1; j <= k; ++j) {
    for (std::size_t m = 1; m <= n_; ++m) {
      esp_[j][m] = esp_[j][m - 1] + lambda_[m - 1] * esp_[j - 1][m - 1];
    }
  }
}

std::vector<std::size_t> KdppSampler::sample(Rng& rng) const {
  // Phase 1: pick k eigenvectors, scanning from the last one down.
  std::vector<std::size_t> chosen;
  std::size_t remaining = k_;
  for (std::size_t m = n_; m >= 1 && remaining > 0; --m) {
    if (m == remaining) {
      for (std::size_t t = m; t >= 1; --t) chosen.push_back(t - 1);
      break;
    }
    const double p = lambda_[m - 1] * esp_[remaining - 1][m - 1] / esp_[remaining][m];
    if (uniform01(rng) < p) {
      chosen.push_back(m - 1);
      --remaining;
    }
  }

  // Phase 2: projection chain over the span of the chosen eigenvectors.
  // basis[c] is the c-th column of V, stored contiguously.
  std::vector<std::vector<double>> basis;
  for (std::size_t m : chosen) {
    std::vector<double> col(n_);
    for (std::size_t i = 0; i < n_; ++i) col[i] = vectors_(i, m);
    basis.push_back(std::move(col));
  }

  std::vector<std::size_t> out;
  std::vector<double> weights(n_);
  while (!basis.empty()) {
    std::fill(weights.begin(), weights.end(), 0.0);
    for (const auto& col : basis) {
      for (std::size_t i = 0; i < n_; ++i) weights[i] += col[i] * col[i];
    }
    for (std::size_t s : out) weights[s] = 0.0;
    const std::size_t item = sample_categorical(rng, weights);
    out.push_back(item);

    std::size_t pivot = 0;
    for (std::size_t c = 1; c < basis.size(); ++c) {
      if (std::abs(basis[c][item]) > std::abs(basis[pivot][item])) pivot = c;
    }
    const std::vector<double> piv = std::move(basis[pivot]);
    basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(pivot));
    for (auto& col : basis) {
      const double f = col[item] / piv[item];
      for (std::size_t i = 0; i < n_; ++i) col[i] -= f * piv[i];
    }
    // Modified Gram-Schmidt.
    for (std::size_t c = 0; c < basis.size(); ++c) {
      for (std::size_t b = 0; b < c; ++b) {
        double d = 0.0;
        for (std::size_t i = 0; i < n_; ++i) d += basis[c][i] * basis[b][i];
        for (std::size_t i = 0; i < n_; ++i) basis[c][i] -= d * basis[b][i];
      }
      double norm = 0.0;
      for (double v : basis[c]) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > 0.0) {
        for (double& v : basis[c]) v /= norm;
      }
    }
  }
  return out;
}

SelectionResult kdpp_sample(const LEnsemble& l, std::size_t k, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  KdppSampler sampler(l.kernel(), k);
  Rng rng(seed);
  SelectionResult r;
  r.indices = sampler.sample(rng);
  r.log_det = evaluate_log_det(l, r.indices);
  r.method = Method::kdpp;
  r.elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace pdpp
