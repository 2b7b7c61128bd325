#pragma once

// Data-parallel inner loops of the dense kernel. Each routine has a portable
// scalar reference implementation and, where the CPU supports it, an AVX2+FMA
// variant. The variant is chosen once at first use; tests pin both and check
// they agree.

#include <cstddef>
#include <span>
#include <string_view>

namespace hinftrack::simd {

enum class Backend { kScalar, kAvx2 };

std::string_view backend_name(Backend b);

/// True when the running CPU (and the build) can execute `b`.
bool backend_available(Backend b);

/// The backend currently used by the dispatching entry points. On first call
/// this is the best available backend, unless the environment variable
/// HINFTRACK_SIMD is set to "scalar" or "avx2".
Backend active_backend();

/// Force a backend. Throws std::invalid_argument if it is not available.
void set_backend(Backend b);

// Dispatching entry points.
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);
/// Row-major C(m×n) = A(m×k) · B(k×n). C must not alias A or B.
void gemm(std::span<const double> a, std::span<const double> b, std::span<double> c,
          std::size_t m, std::size_t k, std::size_t n);

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
          std::size_t n);
}  // namespace scalar

namespace avx2 {
bool compiled();
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
          std::size_t n);
}  // namespace avx2

}  // namespace hinftrack::simd
