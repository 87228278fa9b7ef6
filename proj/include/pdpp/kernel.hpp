#pragma once

// Quality vectors, embeddings, similarity matrices and L-ensemble kernels.
//
//   additive:        L = diag(Q) + beta * K
//   multiplicative:  L = diag(exp(Q / beta)) * K * diag(exp(Q / beta))
//
// K is either cosine similarity of row-normalised embeddings or an RBF
// kernel exp(-gamma * |e_i - e_j|^2).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pdpp/matrix.hpp"

namespace pdpp {

/// Sequence-level quality scores; higher is better.
class QualityVector {
 public:
  QualityVector() = default;
  explicit QualityVector(std::vector<double> scores);

  std::size_t size() const noexcept { return scores_.size(); }
  double operator[](std::size_t i) const noexcept { return scores_[i]; }
  std::span<const double> values() const noexcept { return scores_; }

  /// Q - min(Q) + 1e-6: strictly positive, ranking preserved.
  QualityVector shifted_nonnegative() const;

 private:
  std::vector<double> scores_;
};

inline constexpr double kQualityShiftEpsilon = 1e-6;

/// n rows x d columns of embedding coordinates.
class EmbeddingSet {
 public:
  EmbeddingSet(std::size_t rows, std::size_t dim);
  EmbeddingSet(std::size_t rows, std::size_t dim, std::vector<double> data);
  static EmbeddingSet from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  bool normalized() const noexcept { return normalized_; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * dim_, dim_}; }

  /// Copy with every row scaled to unit Euclidean norm. Throws InvalidInput
  /// naming the first zero row.
  EmbeddingSet normalized_copy() const;

 private:
  std::size_t rows_;
  std::size_t dim_;
  std::vector<double> data_;
  bool normalized_ = false;
};

/// PSD similarity matrix with unit diagonal.
class SimilarityMatrix {
 public:
  /// Wraps an arbitrary symmetric matrix; checks PSD (tol 1e-8).
  explicit SimilarityMatrix(SymMatrix k);

  const SymMatrix& matrix() const noexcept { return k_; }
  std::size_t dim() const noexcept { return k_.dim(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return k_(i, j); }

 private:
  struct Trusted {};
  SimilarityMatrix(SymMatrix k, Trusted) : k_(std::move(k)) {}
  friend SimilarityMatrix cosine_similarity(const EmbeddingSet&);
  friend SimilarityMatrix rbf_similarity(const EmbeddingSet&, double);

  SymMatrix k_;
};

/// k groups of w consecutive indices: group(i) = i / w.
class Partition {
 public:
  Partition(std::size_t num_groups, std::size_t group_size);

  std::size_t num_groups() const noexcept { return k_; }
  std::size_t group_size() const noexcept { return w_; }
  std::size_t size() const noexcept { return k_ * w_; }
  std::size_t group(std::size_t i) const noexcept { return i / w_; }
  std::size_t first(std::size_t g) const noexcept { return g * w_; }

  /// True iff `indices` holds exactly one member of every group.
  bool is_transversal(std::span<const std::size_t> indices) const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::size_t k_;
  std::size_t w_;
};

enum class KernelVariant { additive, multiplicative };

std::string_view to_string(KernelVariant v) noexcept;
KernelVariant parse_kernel_variant(std::string_view s);

/// PSD kernel L with the partition that encodes beam ancestry.
class LEnsemble {
 public:
  /// Validates n == k*w and PSD within tol 1e-8 (O(n^3)).
  LEnsemble(SymMatrix kernel, Partition partition, KernelVariant variant, double beta);

  const SymMatrix& kernel() const noexcept { return kernel_; }
  const Partition& partition() const noexcept { return partition_; }
  KernelVariant variant() const noexcept { return variant_; }
  double beta() const noexcept { return beta_; }
  std::size_t size() const noexcept { return kernel_.dim(); }

  /// c * L with the same partition (c > 0).
  LEnsemble scaled(double c) const;

 private:
  struct Trusted {};
  LEnsemble(SymMatrix kernel, Partition partition, KernelVariant variant, double beta,
            Trusted);
  friend LEnsemble additive_kernel(const QualityVector&, const SimilarityMatrix&, double,
                                   const Partition&);
  friend LEnsemble multiplicative_kernel(const QualityVector&, const SimilarityMatrix&,
                                         double, const Partition&);

  SymMatrix kernel_;
  Partition partition_;
  KernelVariant variant_;
  double beta_;
};

inline constexpr double kPsdTolerance = 1e-8;

SimilarityMatrix cosine_similarity(const EmbeddingSet& e);
SimilarityMatrix rbf_similarity(const EmbeddingSet& e, double gamma);

enum class GammaRule { inverse_dim, median };

/// 1/d, or 1 / median of pairwise squared distances (falls back to 1/d when
/// all rows coincide).
double resolve_gamma(const EmbeddingSet& e, GammaRule rule);

/// diag(Q) + beta*K. Requires Q >= 0 and beta >= 0.
LEnsemble additive_kernel(const QualityVector& q, const SimilarityMatrix& k, double beta,
                          const Partition& partition);

/// diag(e^{Q/beta}) K diag(e^{Q/beta}). Requires beta > 0 and Q_i/beta <= 700.
LEnsemble multiplicative_kernel(const QualityVector& q, const SimilarityMatrix& k,
                                double beta, const Partition& partition);

struct SyntheticKernelConfig {
  std::size_t k = 32;
  std::size_t w = 32;
  std::size_t embed_dim = 64;
  double beta = 1.0;
  double quality_mean = 0.0;
  double quality_stddev = 1.0;
  std::vector<double> embedding_mean;  // empty means the zero vector
  double embedding_cov_scale = 1.0;    // covariance = scale * I
  std::uint64_t seed = 0;
  KernelVariant variant = KernelVariant::additive;

  void validate() const;
};

struct SyntheticInstance {
  QualityVector quality;  // already shifted nonnegative
  EmbeddingSet embeddings;
  SimilarityMatrix similarity;
  LEnsemble ensemble;
};

/// Gaussian embeddings (row-normalised) and Gaussian quality scores shifted
/// to be positive, combined per cfg.variant with cosine similarity.
/// Deterministic in cfg.seed.
SyntheticInstance generate_synthetic(const SyntheticKernelConfig& cfg);

/// Strict JSON loading: unknown fields are an error.
SyntheticKernelConfig synthetic_config_from_json(std::string_view json_text);
std::string synthetic_config_to_json(const SyntheticKernelConfig& cfg);

}  // namespace pdpp
