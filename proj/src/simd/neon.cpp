// AArch64 NEON kernels (two doubles per register).

#include "tables.hpp"

#include <arm_neon.h>

namespace pdpp::simd::detail {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc = __builtin_fma(a[i], b[i], acc);
  return acc;
}

double squared_distance_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double out = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    out = __builtin_fma(d, d, out);
  }
  return out;
}

void rotate_neon(double* x, double* y, std::size_t n, double c, double s) {
  const float64x2_t vc = vdupq_n_f64(c);
  const float64x2_t vs = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t xi = vld1q_f64(x + i);
    const float64x2_t yi = vld1q_f64(y + i);
    vst1q_f64(x + i, vfmsq_f64(vmulq_f64(vc, xi), vs, yi));
    vst1q_f64(y + i, vfmaq_f64(vmulq_f64(vc, yi), vs, xi));
  }
  for (; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = c * xi - s * yi;
    y[i] = s * xi + c * yi;
  }
}

void project_update_one(const ProjectUpdate& p, std::size_t i) {
  double acc = p.pivot_row[i];
  for (std::size_t s = 0; s < p.depth; ++s) {
    acc = __builtin_fma(-p.coeffs[s], p.history[history_index(s, i, p.capacity)], acc);
  }
  const double e = acc * p.inv_pivot;
  p.history[history_index(p.depth, i, p.capacity)] = e;
  const double d = __builtin_fma(-e, e, p.d2[i]);
  p.d2[i] = d > 0.0 ? d : 0.0;
}

void project_update_neon(const ProjectUpdate& p) {
  const float64x2_t inv = vdupq_n_f64(p.inv_pivot);
  const float64x2_t zero = vdupq_n_f64(0.0);
  const std::size_t panel_stride = kPanel * p.capacity;
  std::size_t i = p.begin;
  for (; i < p.end && i % kPanel != 0; ++i) project_update_one(p, i);
  for (; i + kPanel <= p.end; i += kPanel) {
    double* h = p.history + (i / kPanel) * panel_stride;
    float64x2_t a0 = vld1q_f64(p.pivot_row + i);
    float64x2_t a1 = vld1q_f64(p.pivot_row + i + 2);
    for (std::size_t s = 0; s < p.depth; ++s) {
      const float64x2_t c = vdupq_n_f64(p.coeffs[s]);
      a0 = vfmsq_f64(a0, c, vld1q_f64(h + s * kPanel));
      a1 = vfmsq_f64(a1, c, vld1q_f64(h + s * kPanel + 2));
    }
    const float64x2_t e0 = vmulq_f64(a0, inv);
    const float64x2_t e1 = vmulq_f64(a1, inv);
    vst1q_f64(h + p.depth * kPanel, e0);
    vst1q_f64(h + p.depth * kPanel + 2, e1);
    vst1q_f64(p.d2 + i, vmaxq_f64(vfmsq_f64(vld1q_f64(p.d2 + i), e0, e0), zero));
    vst1q_f64(p.d2 + i + 2, vmaxq_f64(vfmsq_f64(vld1q_f64(p.d2 + i + 2), e1, e1), zero));
  }
  for (; i < p.end; ++i) project_update_one(p, i);
}

std::size_t argmax_above_neon(const double* x, std::size_t n, double floor) {
  float64x2_t m0 = vdupq_n_f64(floor);
  float64x2_t m1 = m0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    m0 = vmaxq_f64(m0, vld1q_f64(x + i));
    m1 = vmaxq_f64(m1, vld1q_f64(x + i + 2));
  }
  double top = vmaxvq_f64(vmaxq_f64(m0, m1));
  for (; i < n; ++i) top = x[i] > top ? x[i] : top;
  if (!(top > floor)) return n;
  for (i = 0; i < n; ++i) {
    if (x[i] == top) return i;
  }
  return n;
}

}  // namespace

const KernelTable neon_table{
    Isa::neon, dot_neon, squared_distance_neon, rotate_neon, project_update_neon, argmax_above_neon,
};

}  // namespace pdpp::simd::detail
