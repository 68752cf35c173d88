#include "tcpr/kernels.hpp"

#include <atomic>

#include "kernel_table.hpp"

namespace tcpr::kernels {

namespace {

// --- scalar reference implementations ---

float scalar_dot_f32(const float* a, const float* b, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double scalar_dot_f32_f64acc(const float* a, const float* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

double scalar_dot_f64(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void scalar_accumulate_f64(double* acc, const float* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += static_cast<double>(x[i]);
}

void scalar_axpy_f64(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scalar_scale_f32(const float* x, float s, float* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = s * x[i];
}

void scalar_dot_rows_f32(const float* rows, std::size_t n_rows, std::size_t d,
                         const float* probe, float* out) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    out[r] = scalar_dot_f32(rows + r * d, probe, d);
  }
}

constexpr KernelTable kScalarTable = {
    scalar_dot_f32,       scalar_dot_f32_f64acc, scalar_dot_f64,
    scalar_accumulate_f64, scalar_axpy_f64,      scalar_scale_f32,
    scalar_dot_rows_f32,
};

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &kScalarTable;
    case Isa::avx2:
#ifdef TCPR_HAVE_AVX2_TU
      return avx2_table();
#else
      return nullptr;
#endif
    case Isa::neon:
#ifdef TCPR_HAVE_NEON_TU
      return neon_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(TCPR_HAVE_AVX2_TU) && (defined(__x86_64__) || defined(__i386__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(TCPR_HAVE_NEON_TU) && defined(__aarch64__)
      // NEON is architecturally guaranteed on aarch64.
      return true;
#else
      return false;
#endif
  }
  return false;
}

struct Dispatch {
  std::atomic<const KernelTable*> table;
  std::atomic<Isa> isa;
  Dispatch() {
    Isa best = detect_isa();
    table.store(table_for(best), std::memory_order_relaxed);
    isa.store(best, std::memory_order_relaxed);
  }
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) { return cpu_supports(isa) && table_for(isa) != nullptr; }

Isa detect_isa() {
  if (isa_supported(Isa::avx2)) return Isa::avx2;
  if (isa_supported(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa active_isa() { return dispatch().isa.load(std::memory_order_relaxed); }

bool set_active_isa(Isa isa) {
  if (!isa_supported(isa)) return false;
  dispatch().table.store(table_for(isa), std::memory_order_relaxed);
  dispatch().isa.store(isa, std::memory_order_relaxed);
  return true;
}

float dot_f32(const float* a, const float* b, std::size_t n) {
  return dispatch().table.load(std::memory_order_relaxed)->dot_f32(a, b, n);
}

double dot_f32_f64acc(const float* a, const float* b, std::size_t n) {
  return dispatch().table.load(std::memory_order_relaxed)->dot_f32_f64acc(a, b, n);
}

double dot_f64(const double* a, const double* b, std::size_t n) {
  return dispatch().table.load(std::memory_order_relaxed)->dot_f64(a, b, n);
}

void accumulate_f64(double* acc, const float* x, std::size_t n) {
  dispatch().table.load(std::memory_order_relaxed)->accumulate_f64(acc, x, n);
}

void axpy_f64(double a, const double* x, double* y, std::size_t n) {
  dispatch().table.load(std::memory_order_relaxed)->axpy_f64(a, x, y, n);
}

void scale_f32(const float* x, float s, float* out, std::size_t n) {
  dispatch().table.load(std::memory_order_relaxed)->scale_f32(x, s, out, n);
}

void dot_rows_f32(const float* rows, std::size_t n_rows, std::size_t d,
                  const float* probe, float* out) {
  dispatch().table.load(std::memory_order_relaxed)->dot_rows_f32(rows, n_rows, d,
                                                                 probe, out);
}

}  // namespace tcpr::kernels
