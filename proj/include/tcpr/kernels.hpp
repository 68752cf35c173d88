#pragma once

#include <cstddef>
#include <string_view>

// Low-level vector kernels behind everything that touches feature data.
// Each operation has a scalar reference implementation plus optional
// SIMD variants (AVX2 on x86-64, NEON on aarch64) selected at runtime from
// CPU capabilities. The scalar versions are the semantic ground truth; the
// SIMD versions are tested for equivalence against them.
namespace tcpr::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

// True when the running CPU (and this build) can execute `isa`.
bool isa_supported(Isa isa);

// The best supported ISA; what dispatch uses by default.
Isa detect_isa();

// Currently dispatched ISA.
Isa active_isa();

// Force a specific implementation (used by the equivalence tests and the
// throughput probe). Returns false and changes nothing if unsupported.
bool set_active_isa(Isa isa);

// Dot product with f32 accumulation: the bank-scan workhorse, where f32
// error (~1e-6 relative at these lengths) is far below any tolerance that
// matters for ranking neighbors.
float dot_f32(const float* a, const float* b, std::size_t n);

// Dot product of f32 data with f64 accumulation: used wherever tolerances
// are tight (norms, projection coefficients, classifier forward passes).
double dot_f32_f64acc(const float* a, const float* b, std::size_t n);

// Dot product of f64 data.
double dot_f64(const double* a, const double* b, std::size_t n);

// acc[i] += x[i], widening each f32 addend to f64.
void accumulate_f64(double* acc, const float* x, std::size_t n);

// y[i] += a * x[i], all f64.
void axpy_f64(double a, const double* x, double* y, std::size_t n);

// out[i] = s * x[i]. Exact in every ISA (single rounding per element), so
// variants must agree bit-for-bit.
void scale_f32(const float* x, float s, float* out, std::size_t n);

// out[i] = dot_f32(rows + i*d, probe) for each of n_rows rows. One pass,
// row-major, contiguous.
void dot_rows_f32(const float* rows, std::size_t n_rows, std::size_t d,
                  const float* probe, float* out);

}  // namespace tcpr::kernels
