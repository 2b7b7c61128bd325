#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "hinftrack/linalg.hpp"
#include "hinftrack/simd.hpp"
#include "support.hpp"

using namespace hinftrack;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

class BackendGuard {
 public:
  BackendGuard() : saved_(simd::active_backend()) {}
  ~BackendGuard() { simd::set_backend(saved_); }

 private:
  simd::Backend saved_;
};

bool have_avx2() { return simd::backend_available(simd::Backend::kAvx2); }

}  // namespace

TEST(Simd, ScalarAlwaysAvailable) {
  EXPECT_TRUE(simd::backend_available(simd::Backend::kScalar));
  EXPECT_EQ(simd::backend_name(simd::Backend::kScalar), "scalar");
  EXPECT_EQ(simd::backend_name(simd::Backend::kAvx2), "avx2");
}

TEST(Simd, DotAgreesAcrossBackends) {
  if (!have_avx2()) GTEST_SKIP() << "AVX2 not available";
  std::mt19937_64 rng(1);
  for (std::size_t n = 0; n < 70; ++n) {
    const auto x = random_vec(rng, n), y = random_vec(rng, n);
    const double s = simd::scalar::dot(x.data(), y.data(), n);
    const double v = simd::avx2::dot(x.data(), y.data(), n);
    // Different summation order: bounded by n·eps·Σ|x_i y_i|.
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(x[i] * y[i]);
    EXPECT_LE(std::abs(s - v), 2.0 * static_cast<double>(n + 1) * 1.2e-16 * mag) << n;
  }
}

TEST(Simd, AxpyAndScaleAgreeAcrossBackends) {
  if (!have_avx2()) GTEST_SKIP() << "AVX2 not available";
  std::mt19937_64 rng(2);
  for (std::size_t n = 0; n < 40; ++n) {
    const auto x = random_vec(rng, n);
    auto y1 = random_vec(rng, n);
    auto y2 = y1;
    simd::scalar::axpy(0.37, x.data(), y1.data(), n);
    simd::avx2::axpy(0.37, x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-15);
    simd::scalar::scale(-1.7, y1.data(), n);
    simd::avx2::scale(-1.7, y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-15);
  }
}

TEST(Simd, GemmAgreesAcrossBackends) {
  if (!have_avx2()) GTEST_SKIP() << "AVX2 not available";
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    std::uniform_int_distribution<std::size_t> d(1, 19);
    const std::size_t m = d(rng), k = d(rng), n = d(rng);
    const auto a = random_vec(rng, m * k), b = random_vec(rng, k * n);
    std::vector<double> c1(m * n, 99.0), c2(m * n, -99.0);
    simd::scalar::gemm(a.data(), b.data(), c1.data(), m, k, n);
    simd::avx2::gemm(a.data(), b.data(), c2.data(), m, k, n);
    for (std::size_t i = 0; i < m * n; ++i) EXPECT_NEAR(c1[i], c2[i], 1e-14 * static_cast<double>(k));
  }
}

TEST(Simd, DispatchFollowsSelectedBackend) {
  BackendGuard guard;
  simd::set_backend(simd::Backend::kScalar);
  EXPECT_EQ(simd::active_backend(), simd::Backend::kScalar);
  std::mt19937_64 rng(4);
  const Matrix a = testsupport::random_matrix(rng, 9, 7), b = testsupport::random_matrix(rng, 7, 5);
  const Matrix scalar_product = a * b;
  const double scalar_radius = spectral_radius(a * a.transpose());
  if (have_avx2()) {
    simd::set_backend(simd::Backend::kAvx2);
    EXPECT_EQ(simd::active_backend(), simd::Backend::kAvx2);
    EXPECT_LT((a * b - scalar_product).max_abs(), 1e-14);
    EXPECT_NEAR(spectral_radius(a * a.transpose()), scalar_radius, 1e-12);
  } else {
    EXPECT_THROW(simd::set_backend(simd::Backend::kAvx2), std::invalid_argument);
  }
}

TEST(Simd, SizeMismatchThrows) {
  std::vector<double> x(3), y(4);
  EXPECT_THROW(simd::dot(x, y), std::invalid_argument);
  EXPECT_THROW(simd::axpy(1.0, x, y), std::invalid_argument);
  std::vector<double> c(5);
  EXPECT_THROW(simd::gemm(x, y, c, 1, 3, 2), std::invalid_argument);
}
