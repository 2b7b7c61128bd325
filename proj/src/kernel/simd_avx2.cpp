// Compiled with -mavx2 -mfma on x86-64; elsewhere only the stubs are built and
// backend_available(kAvx2) reports false.
#include "hinftrack/simd.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#define HINFTRACK_HAVE_AVX2 1
#include <immintrin.h>
#else
#define HINFTRACK_HAVE_AVX2 0
#endif

namespace hinftrack::simd::avx2 {

#if HINFTRACK_HAVE_AVX2

bool compiled() { return true; }

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  __m128d lo = _mm256_castpd256_pd128(acc0);
  __m128d hi = _mm256_extractf128_pd(acc0, 1);
  lo = _mm_add_pd(lo, hi);
  double s = _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) x[i] *= alpha;
}

void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
          std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    std::size_t j = 0;
    // 8 columns of C at a time held in registers across the whole k loop.
    for (; j + 8 <= n; j += 8) {
      __m256d c0 = _mm256_setzero_pd();
      __m256d c1 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d aip = _mm256_set1_pd(a[i * k + p]);
        const double* bp = b + p * n + j;
        c0 = _mm256_fmadd_pd(aip, _mm256_loadu_pd(bp), c0);
        c1 = _mm256_fmadd_pd(aip, _mm256_loadu_pd(bp + 4), c1);
      }
      _mm256_storeu_pd(ci + j, c0);
      _mm256_storeu_pd(ci + j + 4, c1);
    }
    for (; j + 4 <= n; j += 4) {
      __m256d c0 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        c0 = _mm256_fmadd_pd(_mm256_set1_pd(a[i * k + p]), _mm256_loadu_pd(b + p * n + j), c0);
      }
      _mm256_storeu_pd(ci + j, c0);
    }
    for (; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      ci[j] = s;
    }
  }
}

#else

bool compiled() { return false; }
double dot(const double* x, const double* y, std::size_t n) { return scalar::dot(x, y, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
void scale(double alpha, double* x, std::size_t n) { scalar::scale(alpha, x, n); }
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
          std::size_t n) {
  scalar::gemm(a, b, c, m, k, n);
}

#endif

}  // namespace hinftrack::simd::avx2
