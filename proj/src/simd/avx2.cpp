// AVX2 + FMA kernels. Compiled with -mavx2 -mfma; only reachable through
// the dispatch table after a cpuid check.

#include "tables.hpp"

#include <immintrin.h>

namespace pdpp::simd::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
  for (; i < n; ++i) acc = __builtin_fma(a[i], b[i], acc);
  return acc;
}

double squared_distance_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    acc = __builtin_fma(d, d, acc);
  }
  return acc;
}

void rotate_avx2(double* x, double* y, std::size_t n, double c, double s) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xi = _mm256_loadu_pd(x + i);
    const __m256d yi = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(x + i, _mm256_fmsub_pd(vc, xi, _mm256_mul_pd(vs, yi)));
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(vs, xi, _mm256_mul_pd(vc, yi)));
  }
  for (; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = __builtin_fma(c, xi, -(s * yi));
    y[i] = __builtin_fma(s, xi, c * yi);
  }
}

inline __m256d finish_lane(__m256d acc, __m256d inv, double* out, double* d2) {
  const __m256d e = _mm256_mul_pd(acc, inv);
  _mm256_storeu_pd(out, e);
  const __m256d d = _mm256_fnmadd_pd(e, e, _mm256_loadu_pd(d2));
  _mm256_storeu_pd(d2, _mm256_max_pd(d, _mm256_setzero_pd()));
  return e;
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

void project_update_avx2(const ProjectUpdate& p) {
  const __m256d inv = _mm256_set1_pd(p.inv_pivot);
  const std::size_t panel_stride = kPanel * p.capacity;
  std::size_t i = p.begin;
  for (; i < p.end && i % kPanel != 0; ++i) project_update_one(p, i);

  // kBlock panels per pass, one accumulator each, to hide FMA latency.
  constexpr std::size_t kBlock = 8;
  for (; i + kBlock * kPanel <= p.end; i += kBlock * kPanel) {
    double* h = p.history + (i / kPanel) * panel_stride;
    __m256d acc[kBlock];
    for (std::size_t b = 0; b < kBlock; ++b) acc[b] = _mm256_loadu_pd(p.pivot_row + i + b * kPanel);
    for (std::size_t s = 0; s < p.depth; ++s) {
      const __m256d c = _mm256_broadcast_sd(p.coeffs + s);
      for (std::size_t b = 0; b < kBlock; ++b) {
        acc[b] = _mm256_fnmadd_pd(c, _mm256_loadu_pd(h + b * panel_stride + s * kPanel), acc[b]);
      }
    }
    for (std::size_t b = 0; b < kBlock; ++b) {
      finish_lane(acc[b], inv, h + b * panel_stride + p.depth * kPanel, p.d2 + i + b * kPanel);
    }
  }
  for (; i + kPanel <= p.end; i += kPanel) {
    double* h = p.history + (i / kPanel) * panel_stride;
    __m256d a = _mm256_loadu_pd(p.pivot_row + i);
    for (std::size_t s = 0; s < p.depth; ++s) {
      a = _mm256_fnmadd_pd(_mm256_broadcast_sd(p.coeffs + s), _mm256_loadu_pd(h + s * kPanel), a);
    }
    finish_lane(a, inv, h + p.depth * kPanel, p.d2 + i);
  }
  for (; i < p.end; ++i) project_update_one(p, i);
}

std::size_t argmax_above_avx2(const double* x, std::size_t n, double floor) {
  // Pass 1: the maximum. Pass 2: its first position.
  __m256d m0 = _mm256_set1_pd(floor);
  __m256d m1 = m0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    m0 = _mm256_max_pd(m0, _mm256_loadu_pd(x + i));
    m1 = _mm256_max_pd(m1, _mm256_loadu_pd(x + i + 4));
  }
  const __m256d m = _mm256_max_pd(m0, m1);
  const __m128d h = _mm_max_pd(_mm256_castpd256_pd128(m), _mm256_extractf128_pd(m, 1));
  double top = _mm_cvtsd_f64(_mm_max_sd(h, _mm_unpackhi_pd(h, h)));
  for (; i < n; ++i) top = x[i] > top ? x[i] : top;
  if (!(top > floor)) return n;
  const __m256d target = _mm256_set1_pd(top);
  i = 0;
  for (; i + 4 <= n; i += 4) {
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(x + i), target, _CMP_EQ_OQ));
    if (mask != 0) return i + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i) {
    if (x[i] == top) return i;
  }
  return n;
}

}  // namespace

const KernelTable avx2_table{
    Isa::avx2, dot_avx2, squared_distance_avx2, rotate_avx2, project_update_avx2, argmax_above_avx2,
};

}  // namespace pdpp::simd::detail
