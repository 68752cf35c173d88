#pragma once

#include <cstddef>

// Internal dispatch table shared between the generic dispatcher and the
// ISA-specific translation units. Not installed; include only from src/.
namespace tcpr::kernels {

struct KernelTable {
  float (*dot_f32)(const float*, const float*, std::size_t);
  double (*dot_f32_f64acc)(const float*, const float*, std::size_t);
  double (*dot_f64)(const double*, const double*, std::size_t);
  void (*accumulate_f64)(double*, const float*, std::size_t);
  void (*axpy_f64)(double, const double*, double*, std::size_t);
  void (*scale_f32)(const float*, float, float*, std::size_t);
  void (*dot_rows_f32)(const float*, std::size_t, std::size_t, const float*,
                       float*);
};

// Defined in kernels_avx2.cpp / kernels_neon.cpp when those TUs are built;
// each returns its table (the caller still gates on runtime CPU support
// before routing to it).
const KernelTable* avx2_table();
const KernelTable* neon_table();

}  // namespace tcpr::kernels
