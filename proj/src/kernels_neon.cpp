// NEON kernel variants for aarch64, where NEON is part of the architectural
// baseline. Reached only through the dispatch table.

#include "kernel_table.hpp"

#if !defined(__aarch64__)
#error "kernels_neon.cpp is aarch64-only"
#endif

#include <arm_neon.h>

#include <cstddef>

namespace tcpr::kernels {

namespace {

float neon_dot_f32(const float* a, const float* b, std::size_t n) {
  float32x4_t acc0 = vdupq_n_f32(0.0f);
  float32x4_t acc1 = vdupq_n_f32(0.0f);
  float32x4_t acc2 = vdupq_n_f32(0.0f);
  float32x4_t acc3 = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
    acc1 = vfmaq_f32(acc1, vld1q_f32(a + i + 4), vld1q_f32(b + i + 4));
    acc2 = vfmaq_f32(acc2, vld1q_f32(a + i + 8), vld1q_f32(b + i + 8));
    acc3 = vfmaq_f32(acc3, vld1q_f32(a + i + 12), vld1q_f32(b + i + 12));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
  }
  float acc = vaddvq_f32(vaddq_f32(vaddq_f32(acc0, acc1), vaddq_f32(acc2, acc3)));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double neon_dot_f32_f64acc(const float* a, const float* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float32x4_t va = vld1q_f32(a + i);
    float32x4_t vb = vld1q_f32(b + i);
    acc0 = vfmaq_f64(acc0, vcvt_f64_f32(vget_low_f32(va)), vcvt_f64_f32(vget_low_f32(vb)));
    acc1 = vfmaq_f64(acc1, vcvt_f64_f32(vget_high_f32(va)), vcvt_f64_f32(vget_high_f32(vb)));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

double neon_dot_f64(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void neon_accumulate_f64(double* acc, const float* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float32x4_t vx = vld1q_f32(x + i);
    float64x2_t lo = vaddq_f64(vld1q_f64(acc + i), vcvt_f64_f32(vget_low_f32(vx)));
    float64x2_t hi = vaddq_f64(vld1q_f64(acc + i + 2), vcvt_f64_f32(vget_high_f32(vx)));
    vst1q_f64(acc + i, lo);
    vst1q_f64(acc + i + 2, hi);
  }
  for (; i < n; ++i) acc[i] += static_cast<double>(x[i]);
}

void neon_axpy_f64(double a, const double* x, double* y, std::size_t n) {
  float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void neon_scale_f32(const float* x, float s, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    vst1q_f32(out + i, vmulq_n_f32(vld1q_f32(x + i), s));
  }
  for (; i < n; ++i) out[i] = s * x[i];
}

void neon_dot_rows_f32(const float* rows, std::size_t n_rows, std::size_t d,
                       const float* probe, float* out) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    out[r] = neon_dot_f32(rows + r * d, probe, d);
  }
}

constexpr KernelTable kNeonTable = {
    neon_dot_f32,       neon_dot_f32_f64acc, neon_dot_f64,
    neon_accumulate_f64, neon_axpy_f64,      neon_scale_f32,
    neon_dot_rows_f32,
};

}  // namespace

const KernelTable* neon_table() { return &kNeonTable; }

}  // namespace tcpr::kernels
