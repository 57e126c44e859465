#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace loqi::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

/// Table of data-parallel inner loops. Every variant computes the same
/// mathematical result as the scalar reference; only the summation order
/// (and hence the last few ulps) differs.
struct KernelTable {
  Isa isa;

  double (*dot_f64)(const double* a, const double* b, std::size_t n);
  double (*sqdist_f64)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy_f64)(double alpha, const double* x, double* y, std::size_t n);
  // float inputs, double accumulation
  double (*dot_f32)(const float* a, const float* b, std::size_t n);
  double (*sqdist_f32)(const float* a, const float* b, std::size_t n);
};

const KernelTable& scalar_kernels();

/// Variant for `isa`, or nullptr when it was not compiled in or the
/// running CPU lacks the instructions.
const KernelTable* kernels_for(Isa isa);

/// All variants usable on this machine, scalar first.
std::vector<const KernelTable*> available_kernels();

/// Process-wide table. Chosen once: the LOQI_SIMD environment variable
/// (scalar|avx2|neon|auto) if set, otherwise the widest supported ISA.
const KernelTable& active_kernels();

/// Override the process-wide selection (tests and benchmarks).
void force_isa(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active_kernels().dot_f64(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active_kernels().sqdist_f64(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active_kernels().axpy_f64(alpha, x.data(), y.data(), x.size());
}

inline double dot(std::span<const float> a, std::span<const float> b) {
  return active_kernels().dot_f32(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const float> a, std::span<const float> b) {
  return active_kernels().sqdist_f32(a.data(), b.data(), a.size());
}

}  // namespace loqi::simd
