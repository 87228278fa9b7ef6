// Scalar reference kernels. These define the semantics the vector variants
// are tested against; keep the summation order simple and sequential.

#include "tables.hpp"

namespace pdpp::simd::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void rotate_scalar(double* x, double* y, std::size_t n, double c, double s) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = c * xi - s * yi;
    y[i] = s * xi + c * yi;
  }
}

void project_update_scalar(const ProjectUpdate& p) {
  for (std::size_t i = p.begin; i < p.end; ++i) {
    double acc = p.pivot_row[i];
    for (std::size_t s = 0; s < p.depth; ++s) {
      acc -= p.coeffs[s] * p.history[history_index(s, i, p.capacity)];
    }
    const double e = acc * p.inv_pivot;
    p.history[history_index(p.depth, i, p.capacity)] = e;
    const double d = p.d2[i] - e * e;
    p.d2[i] = d > 0.0 ? d : 0.0;
  }
}

std::size_t argmax_above_scalar(const double* x, std::size_t n, double floor) {
  std::size_t best = n;
  double best_value = floor;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > best_value) {
      best_value = x[i];
      best = i;
    }
  }
  return best;
}

}  // namespace

const KernelTable scalar_table{
    Isa::scalar, dot_scalar, squared_distance_scalar, rotate_scalar,
    project_update_scalar, argmax_above_scalar,
};

}  // namespace pdpp::simd::detail
