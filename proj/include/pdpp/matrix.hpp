#pragma once

// Dense symmetric linear algebra: storage types, cyclic Jacobi
// eigendecomposition, Cholesky, log-determinant and PSD checks.
// All arithmetic is double precision; every function is pure.

#include <cstddef>
#include <span>
#include <vector>

namespace pdpp {

/// Row-major dense matrix (general, not necessarily square).
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  DenseMatrix transposed() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Square symmetric matrix. Both triangles are stored and kept exactly equal.
class SymMatrix {
 public:
  /// n x n zero matrix; n >= 1.
  explicit SymMatrix(std::size_t n);

  /// Symmetrises (A + A^T) / 2. Throws InvalidInput on a non-square or empty
  /// input or non-finite entries.
  static SymMatrix from_dense(const DenseMatrix& a);
  static SymMatrix from_rows(const std::vector<std::vector<double>>& rows);
  static SymMatrix identity(std::size_t n);
  static SymMatrix diagonal(std::span<const double> diag);

  std::size_t dim() const noexcept { return n_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }

  /// Sets both (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double value) noexcept {
    data_[i * n_ + j] = value;
    data_[j * n_ + i] = value;
  }

  void add_to_diagonal(std::span<const double> values);

  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * n_, n_}; }
  std::span<const double> data() const noexcept { return data_; }

  /// Principal submatrix indexed by `idx` (in the given order).
  SymMatrix principal(std::span<const std::size_t> idx) const;

  SymMatrix scaled(double c) const;

  /// P^T A P for the permutation sending position i to perm[i].
  SymMatrix permuted(std::span<const std::size_t> perm) const;

  DenseMatrix to_dense() const;

  double max_abs() const noexcept;

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  SymMatrix() = default;

  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // column j is the eigenvector of values[j]
  std::size_t sweeps = 0;
};

struct JacobiOptions {
  std::size_t max_sweeps = 100;
  bool compute_vectors = true;
};

/// Cyclic Jacobi eigendecomposition. Throws NumericError (carrying the sweep
/// count) when the off-diagonal mass does not vanish within max_sweeps.
EigenDecomposition sym_eigendecompose(const SymMatrix& a, const JacobiOptions& opts = {});

/// Eigenvalues only, ascending.
std::vector<double> sym_eigenvalues(const SymMatrix& a);

/// Pivot threshold used by Cholesky-based routines (applied before sqrt).
inline constexpr double kPivotTolerance = 1e-12;

/// Lower-triangular factor G with A = G G^T. Throws NotPositiveDefinite
/// naming the first pivot <= kPivotTolerance.
DenseMatrix cholesky(const SymMatrix& a);

/// sum_i 2 log G_ii. Throws NotPositiveDefinite for non-PD input.
double log_det(const SymMatrix& a);

/// True iff the smallest eigenvalue of A is >= -tol. Decided by counting the
/// inertia of A + tol*I with an LDL^T sweep (Sylvester), which is O(n^3/3)
/// and needs no eigendecomposition.
bool is_psd(const SymMatrix& a, double tol);

/// Nearest PSD matrix in Frobenius norm: clips negative eigenvalues to zero.
/// An explicit repair; nothing in the library applies it implicitly.
SymMatrix project_psd(const SymMatrix& a);

}  // namespace pdpp
