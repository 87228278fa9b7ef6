#include "pdpp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json_util.hpp"
#include "pdpp/error.hpp"
#include "pdpp/rng.hpp"
#include "pdpp/simd.hpp"

namespace pdpp {

QualityVector::QualityVector(std::vector<double> scores) : scores_(std::move(scores)) {
  for (std::size_t i = 0; i < scores_.size(); ++i) {
    if (!std::isfinite(scores_[i])) {
      throw InvalidInput("QualityVector: non-finite score at index " + std::to_string(i));
    }
  }
}

QualityVector QualityVector::shifted_nonnegative() const {
  if (scores_.empty()) return *this;
  const double lo = *std::min_element(scores_.begin(), scores_.end());
  std::vector<double> out(scores_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scores_[i] - lo + kQualityShiftEpsilon;
  return QualityVector(std::move(out));
}

EmbeddingSet::EmbeddingSet(std::size_t rows, std::size_t dim)
    : rows_(rows), dim_(dim), data_(rows * dim, 0.0) {
  if (rows == 0 || dim == 0) throw InvalidInput("EmbeddingSet: empty shape");
}

EmbeddingSet::EmbeddingSet(std::size_t rows, std::size_t dim, std::vector<double> data)
    : rows_(rows), dim_(dim), data_(std::move(data)) {
  if (rows == 0 || dim == 0) throw InvalidInput("EmbeddingSet: empty shape");
  if (data_.size() != rows * dim) throw InvalidInput("EmbeddingSet: data size mismatch");
  for (double v : data_) {
    if (!std::isfinite(v)) throw InvalidInput("EmbeddingSet: non-finite coordinate");
  }
}

EmbeddingSet EmbeddingSet::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw InvalidInput("EmbeddingSet: no rows");
  const std::size_t d = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * d);
  for (const auto& r : rows) {
    if (r.size() != d) throw InvalidInput("EmbeddingSet: ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return EmbeddingSet(rows.size(), d, std::move(data));
}

EmbeddingSet EmbeddingSet::normalized_copy() const {
  EmbeddingSet out = *this;
  const auto& k = simd::kernels();
  for (std::size_t i = 0; i < rows_; ++i) {
    auto r = out.row(i);
    const double norm = std::sqrt(k.dot(r.data(), r.data(), dim_));
    if (norm == 0.0) {
      throw InvalidInput("embedding row " + std::to_string(i) + " has zero norm");
    }
    for (double& v : r) v /= norm;
  }
  out.normalized_ = true;
  return out;
}

SimilarityMatrix::SimilarityMatrix(SymMatrix k) : k_(std::move(k)) {
  if (!is_psd(k_, kPsdTolerance)) {
    throw InvalidInput("SimilarityMatrix: matrix is not PSD within 1e-8");
  }
}

Partition::Partition(std::size_t num_groups, std::size_t group_size)
    : k_(num_groups), w_(group_size) {
  if (num_groups == 0 || group_size == 0) {
    throw InvalidInput("Partition: group count and size must be >= 1");
  }
}

bool Partition::is_transversal(std::span<const std::size_t> indices) const {
  if (indices.size() != k_) return false;
  std::vector<bool> used(k_, false);
  for (std::size_t i : indices) {
    if (i >= size() || used[group(i)]) return false;
    used[group(i)] = true;
  }
  return true;
}

std::string_view to_string(KernelVariant v) noexcept {
  return v == KernelVariant::additive ? "additive" : "multiplicative";
}

KernelVariant parse_kernel_variant(std::string_view s) {
  if (s == "additive") return KernelVariant::additive;
  if (s == "multiplicative") return KernelVariant::multiplicative;
  throw InvalidInput("unknown kernel variant '" + std::string(s) +
                     "' (expected additive|multiplicative)");
}

LEnsemble::LEnsemble(SymMatrix kernel, Partition partition, KernelVariant variant,
                     double beta)
    : LEnsemble(std::move(kernel), partition, variant, beta, Trusted{}) {
  if (!is_psd(kernel_, kPsdTolerance)) {
    throw InvalidInput("LEnsemble: kernel is not PSD within 1e-8");
  }
}

LEnsemble::LEnsemble(SymMatrix kernel, Partition partition, KernelVariant variant,
                     double beta, Trusted)
    : kernel_(std::move(kernel)), partition_(partition), variant_(variant), beta_(beta) {
  if (kernel_.dim() != partition_.size()) {
    throw InvalidInput("LEnsemble: kernel dimension " + std::to_string(kernel_.dim()) +
                       " != k*w = " + std::to_string(partition_.size()));
  }
  if (!(beta_ >= 0.0)) throw InvalidInput("LEnsemble: beta must be >= 0");
}

LEnsemble LEnsemble::scaled(double c) const {
  if (!(c > 0.0)) throw InvalidInput("LEnsemble::scaled: factor must be > 0");
  return LEnsemble(kernel_.scaled(c), partition_, variant_, beta_, Trusted{});
}

SimilarityMatrix cosine_similarity(const EmbeddingSet& e) {
  const EmbeddingSet unit = e.normalized_copy();
  const auto& k = simd::kernels();
  const std::size_t n = unit.rows();
  SymMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* ri = unit.row(i).data();
    for (std::size_t j = i; j < n; ++j) {
      out.set(i, j, k.dot(ri, unit.row(j).data(), unit.dim()));
    }
  }
  return SimilarityMatrix(std::move(out), SimilarityMatrix::Trusted{});
}

SimilarityMatrix rbf_similarity(const EmbeddingSet& e, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidInput("rbf_similarity: gamma must be a positive finite number");
  }
  const auto& k = simd::kernels();
  const std::size_t n = e.rows();
  SymMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* ri = e.row(i).data();
    out.set(i, i, 1.0);
    for (std::size_t j = i + 1; j < n; ++j) {
      out.set(i, j, std::exp(-gamma * k.squared_distance(ri, e.row(j).data(), e.dim())));
    }
  }
  return SimilarityMatrix(std::move(out), SimilarityMatrix::Trusted{});
}

double resolve_gamma(const EmbeddingSet& e, GammaRule rule) {
  const double inv_dim = 1.0 / static_cast<double>(e.dim());
  if (rule == GammaRule::inverse_dim || e.rows() < 2) return inv_dim;
  std::vector<double> d2;
  d2.reserve(e.rows() * (e.rows() - 1) / 2);
  for (std::size_t i = 0; i < e.rows(); ++i)
    for (std::size_t j = i + 1; j < e.rows(); ++j)
      d2.push_back(simd::squared_distance(e.row(i), e.row(j)));
  const auto mid = d2.begin() + static_cast<std::ptrdiff_t>(d2.size() / 2);
  std::nth_element(d2.begin(), mid, d2.end());
  return *mid > 0.0 ? 1.0 / *mid : inv_dim;
}

namespace {

void check_dims(const QualityVector& q, const SimilarityMatrix& k, const Partition& p) {
  if (q.size() != k.dim() || k.dim() != p.size()) {
    throw InvalidInput("kernel construction: |Q| = " + std::to_string(q.size()) +
                       ", K is " + std::to_string(k.dim()) + "x" + std::to_string(k.dim()) +
                       ", partition covers " + std::to_string(p.size()));
  }
}

}  // namespace

LEnsemble additive_kernel(const QualityVector& q, const SimilarityMatrix& k, double beta,
                          const Partition& partition) {
  check_dims(q, k, partition);
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw InvalidInput("additive_kernel: beta must be a nonnegative finite number");
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] < 0.0) {
      throw InvalidInput("additive_kernel: quality score " + std::to_string(i) +
                         " is negative; shift Q to be nonnegative first");
    }
  }
  const std::size_t n = q.size();
  SymMatrix l(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) l.set(i, j, beta * k(i, j));
  }
  l.add_to_diagonal(q.values());
  return LEnsemble(std::move(l), partition, KernelVariant::additive, beta,
                   LEnsemble::Trusted{});
}

LEnsemble multiplicative_kernel(const QualityVector& q, const SimilarityMatrix& k,
                                double beta, const Partition& partition) {
  check_dims(q, k, partition);
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw InvalidInput("multiplicative_kernel: beta must be a positive finite number");
  }
  const std::size_t n = q.size();
  std::vector<double> scale(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = q[i] / beta;
    if (x > 700.0) {
      throw RangeError("multiplicative_kernel: Q[" + std::to_string(i) + "]/beta = " +
                       std::to_string(x) +
                       " overflows exp; rescale the scores or increase beta");
    }
    scale[i] = std::exp(x);
  }
  SymMatrix l(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) l.set(i, j, scale[i] * k(i, j) * scale[j]);
  }
  return LEnsemble(std::move(l), partition, KernelVariant::multiplicative, beta,
                   LEnsemble::Trusted{});
}

void SyntheticKernelConfig::validate() const {
  if (k == 0 || w == 0) throw InvalidInput("synthetic config: k and w must be >= 1");
  if (k * w < 2) throw InvalidInput("synthetic config: k*w must be >= 2");
  if (embed_dim == 0) throw InvalidInput("synthetic config: embed_dim must be >= 1");
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw InvalidInput("synthetic config: beta must be a nonnegative finite number");
  }
  if (variant == KernelVariant::multiplicative && beta == 0.0) {
    throw InvalidInput("synthetic config: multiplicative kernels need beta > 0");
  }
  if (!(quality_stddev >= 0.0) || !(embedding_cov_scale >= 0.0)) {
    throw InvalidInput("synthetic config: standard deviations must be >= 0");
  }
  if (!embedding_mean.empty() && embedding_mean.size() != embed_dim) {
    throw InvalidInput("synthetic config: embedding_mean has " +
                       std::to_string(embedding_mean.size()) + " entries, embed_dim is " +
                       std::to_string(embed_dim));
  }
  if (embedding_cov_scale == 0.0 &&
      std::all_of(embedding_mean.begin(), embedding_mean.end(),
                  [](double m) { return m == 0.0; })) {
    throw InvalidInput("synthetic config: zero mean and zero covariance give zero embeddings");
  }
}

SyntheticInstance generate_synthetic(const SyntheticKernelConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.k * cfg.w;
  const std::size_t d = cfg.embed_dim;
  Rng rng(cfg.seed);

  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sd = std::sqrt(cfg.embedding_cov_scale);
  std::vector<double> coords(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double mean = cfg.embedding_mean.empty() ? 0.0 : cfg.embedding_mean[j];
      coords[i * d + j] = mean + sd * gauss(rng);
    }
  }
  std::vector<double> scores(n);
  for (double& s : scores) s = cfg.quality_mean + cfg.quality_stddev * gauss(rng);

  EmbeddingSet emb = EmbeddingSet(n, d, std::move(coords)).normalized_copy();
  QualityVector q = QualityVector(std::move(scores)).shifted_nonnegative();
  SimilarityMatrix sim = cosine_similarity(emb);
  const Partition part(cfg.k, cfg.w);
  LEnsemble ens = cfg.variant == KernelVariant::additive
                      ? additive_kernel(q, sim, cfg.beta, part)
                      : multiplicative_kernel(q, sim, cfg.beta, part);
  return SyntheticInstance{std::move(q), std::move(emb), std::move(sim), std::move(ens)};
}

SyntheticKernelConfig synthetic_config_from_json(std::string_view json_text) {
  const detail::Json j = detail::parse_json(json_text, "synthetic config");
  detail::ObjectReader r(j, "config");
  SyntheticKernelConfig cfg;
  cfg.k = r.unsigned_int("k");
  cfg.w = r.unsigned_int("w");
  cfg.embed_dim = r.unsigned_int("embed_dim", cfg.embed_dim);
  cfg.beta = r.number("beta", cfg.beta);
  cfg.quality_mean = r.number("quality_mean", cfg.quality_mean);
  cfg.quality_stddev = r.number("quality_stddev", cfg.quality_stddev);
  if (r.has("embedding_mean")) cfg.embedding_mean = r.numbers("embedding_mean");
  cfg.embedding_cov_scale = r.number("embedding_cov_scale", cfg.embedding_cov_scale);
  cfg.seed = r.unsigned_int("seed", cfg.seed);
  const std::string variant = r.string("variant", "additive");
  try {
    cfg.variant = parse_kernel_variant(variant);
  } catch (const InvalidInput& e) {
    detail::ObjectReader::fail(r.at("variant"), e.what());
  }
  r.finish();
  cfg.validate();
  return cfg;
}

std::string synthetic_config_to_json(const SyntheticKernelConfig& cfg) {
  detail::Json j;
  j["k"] = cfg.k;
  j["w"] = cfg.w;
  j["embed_dim"] = cfg.embed_dim;
  j["beta"] = cfg.beta;
  j["quality_mean"] = cfg.quality_mean;
  j["quality_stddev"] = cfg.quality_stddev;
  j["embedding_mean"] = cfg.embedding_mean;
  j["embedding_cov_scale"] = cfg.embedding_cov_scale;
  j["seed"] = cfg.seed;
  j["variant"] = std::string(to_string(cfg.variant));
  return j.dump(2);
}

}  // namespace pdpp
