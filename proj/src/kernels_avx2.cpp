// AVX2/FMA kernel variants. This translation unit is the only one compiled
// with -mavx2 -mfma; callers reach it exclusively through the dispatch
// table after a cpuid check, so no AVX2 instruction can leak into code
// that runs on older CPUs.

#include "kernel_table.hpp"

#if !defined(__AVX2__) || !defined(__FMA__)
#error "kernels_avx2.cpp must be compiled with -mavx2 -mfma"
#endif

#include <immintrin.h>

#include <cstddef>

namespace tcpr::kernels {

namespace {

inline float hsum_ps(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 shuf = _mm_movehdup_ps(lo);
  __m128 sums = _mm_add_ps(lo, shuf);
  shuf = _mm_movehl_ps(shuf, sums);
  sums = _mm_add_ss(sums, shuf);
  return _mm_cvtss_f32(sums);
}

inline double hsum_pd(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swap = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swap));
}

float avx2_dot_f32(const float* a, const float* b, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  __m256 acc2 = _mm256_setzero_ps();
  __m256 acc3 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
    acc2 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 16), _mm256_loadu_ps(b + i + 16), acc2);
    acc3 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 24), _mm256_loadu_ps(b + i + 24), acc3);
  }
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
  }
  float acc = hsum_ps(_mm256_add_ps(_mm256_add_ps(acc0, acc1), _mm256_add_ps(acc2, acc3)));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double avx2_dot_f32_f64acc(const float* a, const float* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m128 a_lo = _mm_loadu_ps(a + i);
    __m128 a_hi = _mm_loadu_ps(a + i + 4);
    __m128 b_lo = _mm_loadu_ps(b + i);
    __m128 b_hi = _mm_loadu_ps(b + i + 4);
    acc0 = _mm256_fmadd_pd(_mm256_cvtps_pd(a_lo), _mm256_cvtps_pd(b_lo), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_cvtps_pd(a_hi), _mm256_cvtps_pd(b_hi), acc1);
  }
  double acc = hsum_pd(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

double avx2_dot_f64(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  double acc = hsum_pd(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void avx2_accumulate_f64(double* acc, const float* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m128 x_lo = _mm_loadu_ps(x + i);
    __m128 x_hi = _mm_loadu_ps(x + i + 4);
    __m256d a_lo = _mm256_loadu_pd(acc + i);
    __m256d a_hi = _mm256_loadu_pd(acc + i + 4);
    _mm256_storeu_pd(acc + i, _mm256_add_pd(a_lo, _mm256_cvtps_pd(x_lo)));
    _mm256_storeu_pd(acc + i + 4, _mm256_add_pd(a_hi, _mm256_cvtps_pd(x_hi)));
  }
  for (; i < n; ++i) acc[i] += static_cast<double>(x[i]);
}

void avx2_axpy_f64(double a, const double* x, double* y, std::size_t n) {
  __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void avx2_scale_f32(const float* x, float s, float* out, std::size_t n) {
  __m256 vs = _mm256_set1_ps(s);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(out + i, _mm256_mul_ps(vs, _mm256_loadu_ps(x + i)));
  }
  for (; i < n; ++i) out[i] = s * x[i];
}

void avx2_dot_rows_f32(const float* rows, std::size_t n_rows, std::size_t d,
                       const float* probe, float* out) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    out[r] = avx2_dot_f32(rows + r * d, probe, d);
  }
}

constexpr KernelTable kAvx2Table = {
    avx2_dot_f32,       avx2_dot_f32_f64acc, avx2_dot_f64,
    avx2_accumulate_f64, avx2_axpy_f64,      avx2_scale_f32,
    avx2_dot_rows_f32,
};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2Table; }

}  // namespace tcpr::kernels
