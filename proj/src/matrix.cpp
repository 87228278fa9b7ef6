#include "pdpp/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pdpp/error.hpp"
#include "pdpp/simd.hpp"

namespace pdpp {
namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw InvalidInput(std::string(what) + ": non-finite entry at flat index " +
                         std::to_string(i));
    }
  }
}

}  // namespace

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

SymMatrix::SymMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {
  if (n == 0) throw InvalidInput("SymMatrix: dimension must be >= 1");
}

SymMatrix SymMatrix::from_dense(const DenseMatrix& a) {
  if (a.rows() != a.cols()) {
    throw InvalidInput("SymMatrix: matrix is " + std::to_string(a.rows()) + "x" +
                       std::to_string(a.cols()) + ", not square");
  }
  require_finite(a.data(), "SymMatrix");
  SymMatrix s(a.rows());
  for (std::size_t i = 0; i < s.n_; ++i) {
    s.data_[i * s.n_ + i] = a(i, i);
    for (std::size_t j = i + 1; j < s.n_; ++j) s.set(i, j, 0.5 * (a(i, j) + a(j, i)));
  }
  return s;
}

SymMatrix SymMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  DenseMatrix a(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != a.cols()) throw InvalidInput("SymMatrix: ragged rows");
    std::copy(rows[i].begin(), rows[i].end(), a.row(i).begin());
  }
  return from_dense(a);
}

SymMatrix SymMatrix::identity(std::size_t n) {
  SymMatrix s(n);
  for (std::size_t i = 0; i < n; ++i) s.data_[i * n + i] = 1.0;
  return s;
}

SymMatrix SymMatrix::diagonal(std::span<const double> diag) {
  require_finite(diag, "SymMatrix::diagonal");
  SymMatrix s(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) s.data_[i * s.n_ + i] = diag[i];
  return s;
}

void SymMatrix::add_to_diagonal(std::span<const double> values) {
  if (values.size() != n_) throw InvalidInput("add_to_diagonal: dimension mismatch");
  for (std::size_t i = 0; i < n_; ++i) data_[i * n_ + i] += values[i];
}

SymMatrix SymMatrix::principal(std::span<const std::size_t> idx) const {
  SymMatrix s;
  s.n_ = idx.size();
  s.data_.resize(s.n_ * s.n_);
  for (std::size_t a = 0; a < s.n_; ++a) {
    const double* src = data_.data() + idx[a] * n_;
    for (std::size_t b = 0; b < s.n_; ++b) s.data_[a * s.n_ + b] = src[idx[b]];
  }
  return s;
}

SymMatrix SymMatrix::scaled(double c) const {
  SymMatrix s = *this;
  for (double& v : s.data_) v *= c;
  return s;
}

SymMatrix SymMatrix::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != n_) throw InvalidInput("permuted: permutation length mismatch");
  return principal(perm);
}

DenseMatrix SymMatrix::to_dense() const {
  DenseMatrix d(n_, n_);
  std::copy(data_.begin(), data_.end(), d.data().begin());
  return d;
}

double SymMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

EigenDecomposition sym_eigendecompose(const SymMatrix& input, const JacobiOptions& opts) {
  require_finite(input.data(), "sym_eigendecompose");
  const std::size_t n = input.dim();
  const auto& k = simd::kernels();

  DenseMatrix a = input.to_dense();
  // Rows of vt are the eigenvectors, so both updates are row rotations.
  DenseMatrix vt(opts.compute_vectors ? n : 0, opts.compute_vectors ? n : 0);
  for (std::size_t i = 0; i < vt.rows(); ++i) vt(i, i) = 1.0;

  std::size_t sweep = 0;
  for (;; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::abs(a(p, q));
    if (off == 0.0) break;
    if (sweep >= opts.max_sweeps) {
      throw NumericError("sym_eigendecompose: Jacobi did not converge after " +
                             std::to_string(sweep) + " sweeps (off-diagonal mass " +
                             std::to_string(off) + ")",
                         sweep);
    }
    const double threshold = sweep < 3 ? 0.2 * off / static_cast<double>(n * n) : 0.0;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        const double g = 100.0 * std::abs(apq);
        const double app = a(p, p);
        const double aqq = a(q, q);
        if (sweep > 3 && std::abs(app) + g == std::abs(app) &&
            std::abs(aqq) + g == std::abs(aqq)) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        if (std::abs(apq) <= threshold || apq == 0.0) continue;

        const double h = aqq - app;
        double t;
        if (std::abs(h) + g == std::abs(h)) {
          t = apq / h;
        } else {
          const double theta = 0.5 * h / apq;
          t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        k.rotate(a.row(p).data(), a.row(q).data(), n, c, s);
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          a(r, p) = a(p, r);
          a(r, q) = a(q, r);
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        if (opts.compute_vectors) k.rotate(vt.row(p).data(), vt.row(q).data(), n, c, s);
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

  EigenDecomposition out;
  out.sweeps = sweep;
  out.values.resize(n);
  if (opts.compute_vectors) out.vectors = DenseMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    if (opts.compute_vectors) {
      const auto v = vt.row(order[j]);
      for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v[i];
    }
  }
  return out;
}

std::vector<double> sym_eigenvalues(const SymMatrix& a) {
  return sym_eigendecompose(a, {.compute_vectors = false}).values;
}

DenseMatrix cholesky(const SymMatrix& a) {
  require_finite(a.data(), "cholesky");
  const std::size_t n = a.dim();
  const auto& k = simd::kernels();
  DenseMatrix g(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double* gj = g.row(j).data();
    const double pivot = a(j, j) - k.dot(gj, gj, j);
    if (!(pivot > kPivotTolerance)) throw NotPositiveDefinite(j, pivot);
    const double d = std::sqrt(pivot);
    g(j, j) = d;
    const double inv = 1.0 / d;
    for (std::size_t i = j + 1; i < n; ++i) {
      g(i, j) = (a(i, j) - k.dot(g.row(i).data(), gj, j)) * inv;
    }
  }
  return g;
}

double log_det(const SymMatrix& a) {
  const DenseMatrix g = cholesky(a);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) acc += 2.0 * std::log(g(i, i));
  return acc;
}

bool is_psd(const SymMatrix& a, double tol) {
  require_finite(a.data(), "is_psd");
  const std::size_t n = a.dim();
  const auto& k = simd::kernels();

  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)) + tol);
  const double zero_pivot = 1e-12 * scale;
  const double zero_residual = std::sqrt(zero_pivot * scale);

  // A + tol*I = L D L^T; w(i, j) = L(i, j) * D(j) keeps the inner sums as dots.
  DenseMatrix l(n, n);
  DenseMatrix w(n, n);
  std::vector<double> d(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double dj = a(j, j) + tol - k.dot(l.row(j).data(), w.row(j).data(), j);
    if (dj < -zero_pivot) return false;
    if (dj <= zero_pivot) {
      // Zero pivot: PSD only if the whole residual column vanishes.
      for (std::size_t i = j + 1; i < n; ++i) {
        const double r = a(i, j) - k.dot(l.row(i).data(), w.row(j).data(), j);
        if (std::abs(r) > zero_residual) return false;
      }
      d[j] = 0.0;
      continue;
    }
    d[j] = dj;
    for (std::size_t i = j + 1; i < n; ++i) {
      const double r = a(i, j) - k.dot(l.row(i).data(), w.row(j).data(), j);
      l(i, j) = r / dj;
      w(i, j) = r;
    }
  }
  return true;
}

SymMatrix project_psd(const SymMatrix& a) {
  const EigenDecomposition eig = sym_eigendecompose(a);
  const std::size_t n = a.dim();
  DenseMatrix out(n, n);
  for (std::size_t m = 0; m < n; ++m) {
    const double lambda = std::max(eig.values[m], 0.0);
    if (lambda == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double vi = lambda * eig.vectors(i, m);
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vi * eig.vectors(j, m);
    }
  }
  return SymMatrix::from_dense(out);
}

}  // namespace pdpp
