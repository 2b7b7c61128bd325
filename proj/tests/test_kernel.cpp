#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "hinftrack/error.hpp"
#include "hinftrack/linalg.hpp"
#include "support.hpp"

using namespace hinftrack;
using testsupport::from_eigen;
using testsupport::random_matrix;
using testsupport::to_eigen;

namespace {

double max_diff(const Matrix& a, const Eigen::MatrixXd& b) { return (to_eigen(a) - b).cwiseAbs().maxCoeff(); }

std::vector<Complex> sorted(std::vector<Complex> v) {
  std::sort(v.begin(), v.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return v;
}

// Each eigenvalue of `a` is matched to a distinct one of `b`.
double spectrum_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  std::vector<bool> used(b.size(), false);
  double worst = 0.0;
  for (const auto& x : a) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t idx = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (!used[j] && std::abs(x - b[j]) < best) best = std::abs(x - b[j]), idx = j;
    }
    used[idx] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

TEST(Matrix, ConstructionAndAccess) {
  const Matrix m{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m(1, 2), 6.0);
  EXPECT_EQ(m.transpose()(2, 1), 6.0);
  EXPECT_EQ(Matrix::identity(3)(1, 1), 1.0);
  EXPECT_EQ(Matrix::identity(3)(0, 1), 0.0);
  EXPECT_EQ(m.block(0, 1, 2, 2), (Matrix{{2, 3}, {5, 6}}));
  EXPECT_THROW((Matrix{{1, 2}, {3}}), DimensionError);
}

TEST(Matrix, ProductMatchesEigen) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    std::uniform_int_distribution<int> d(1, 17);
    const int m = d(rng), k = d(rng), n = d(rng);
    const Matrix a = random_matrix(rng, m, k), b = random_matrix(rng, k, n);
    EXPECT_LT(max_diff(a * b, to_eigen(a) * to_eigen(b)), 1e-13);
  }
  EXPECT_THROW(Matrix(2, 3) * Matrix(2, 3), DimensionError);
  EXPECT_THROW(Matrix(2, 3) + Matrix(3, 2), DimensionError);
}

TEST(Matrix, KroneckerMatchesEigenAndMixedProduct) {
  std::mt19937_64 rng(12);
  const Matrix a = random_matrix(rng, 2, 3), b = random_matrix(rng, 3, 2);
  const Matrix c = random_matrix(rng, 3, 2), d = random_matrix(rng, 2, 4);
  const Matrix k = kron(a, b);
  ASSERT_EQ(k.rows(), 6u);
  ASSERT_EQ(k.cols(), 6u);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t q = 0; q < 2; ++q) EXPECT_DOUBLE_EQ(k(i * 3 + p, j * 2 + q), a(i, j) * b(p, q));
  // (A⊗B)(C⊗D) = (AC)⊗(BD)
  const Matrix lhs = kron(a, b) * kron(c, d);
  const Matrix rhs = kron(a * c, b * d);
  EXPECT_LT((lhs - rhs).max_abs(), 1e-13);
}

TEST(Matrix, StackingAndTrace) {
  const Matrix a{{1, 2}}, b{{3, 4}, {5, 6}};
  EXPECT_EQ(vstack({&a, &b}), (Matrix{{1, 2}, {3, 4}, {5, 6}}));
  const Matrix c{{7}, {8}};
  EXPECT_EQ(hstack({&b, &c}), (Matrix{{3, 4, 7}, {5, 6, 8}}));
  EXPECT_THROW(vstack({&a, &c}), DimensionError);
  EXPECT_DOUBLE_EQ(trace(b), 9.0);
}

TEST(SymmetricEigen, MatchesEigenSelfAdjointSolver) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 1 + t % 12;
    Matrix a = random_matrix(rng, n, n);
    a = a + a.transpose();
    const SymmetricEigen e = eig_sym_decompose(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(to_eigen(a));
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(e.values[i], oracle.eigenvalues()(i), 1e-12);
    // A V = V Λ and VᵀV = I.
    const Matrix av = a * e.vectors;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(av(i, j), e.vectors(i, j) * e.values[j], 1e-12);
    EXPECT_LT((e.vectors.transpose() * e.vectors - Matrix::identity(n)).max_abs(), 1e-12);
  }
}

TEST(SymmetricEigen, RejectsAsymmetricAndNonSquare) {
  EXPECT_THROW(eig_sym(Matrix{{1, 2}, {0, 1}}), ModelError);
  EXPECT_THROW(eig_sym(Matrix(2, 3)), DimensionError);
}

TEST(GeneralEigen, MatchesEigenSolver) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 1 + t % 14;
    const Matrix a = random_matrix(rng, n, n, -2, 2);
    const Spectrum s = eig_general(a);
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(to_eigen(a)).eigenvalues();
    std::vector<Complex> oracle(ev.data(), ev.data() + ev.size());
    EXPECT_LT(spectrum_distance(sorted(s.eigenvalues), sorted(oracle)), 1e-10) << to_string(a);
  }
}

TEST(GeneralEigen, ConjugatePairsAndSpecialCases) {
  const Spectrum rot = eig_general(Matrix{{0, -1}, {1, 0}});
  ASSERT_EQ(rot.size(), 2u);
  EXPECT_NEAR(rot.eigenvalues[0].imag(), 1.0, 1e-14);
  EXPECT_NEAR(rot.eigenvalues[1].imag(), -1.0, 1e-14);
  // Jordan block of the leader in the worked example: eigenvalues 1, 1, 0.5.
  const Spectrum j = eig_general(Matrix{{1, 0, 0}, {1, 1, 0}, {1, 1, 0.5}});
  EXPECT_NEAR(spectral_radius(Matrix{{1, 0, 0}, {1, 1, 0}, {1, 1, 0.5}}), 1.0, 1e-7);
  EXPECT_EQ(j.size(), 3u);
  EXPECT_EQ(spectral_radius(Matrix(3, 3)), 0.0);
  EXPECT_THROW(eig_general(Matrix(2, 3)), DimensionError);
}

TEST(GeneralEigen, TraceEqualsEigenvalueSum) {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 30; ++t) {
    const Matrix a = random_matrix(rng, 8, 8);
    Complex sum = 0.0;
    for (const auto& l : eig_general(a).eigenvalues) sum += l;
    EXPECT_NEAR(sum.real(), trace(a), 1e-11);
    EXPECT_NEAR(sum.imag(), 0.0, 1e-11);
  }
}

TEST(Svd, MatchesEigenJacobiSvd) {
  std::mt19937_64 rng(16);
  for (int t = 0; t < 40; ++t) {
    const std::size_t r = 1 + t % 9, c = 1 + (t * 7) % 11;
    const Matrix a = random_matrix(rng, r, c);
    const auto sv = singular_values(a);
    const Eigen::VectorXd o = Eigen::JacobiSVD<Eigen::MatrixXd>(to_eigen(a)).singularValues();
    ASSERT_EQ(sv.size(), static_cast<std::size_t>(o.size()));
    for (std::size_t i = 0; i < sv.size(); ++i) EXPECT_NEAR(sv[i], o(i), 1e-12);
  }
}

TEST(Svd, ComplexMatchesEigen) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 20; ++t) {
    const std::size_t r = 1 + t % 6, c = 1 + (t * 5) % 7;
    const Matrix re = random_matrix(rng, r, c), im = random_matrix(rng, r, c);
    CMatrix a(r, c);
    Eigen::MatrixXcd e(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) a(i, j) = e(i, j) = Complex(re(i, j), im(i, j));
    const auto sv = singular_values(a);
    const Eigen::VectorXd o = Eigen::JacobiSVD<Eigen::MatrixXcd>(e).singularValues();
    for (std::size_t i = 0; i < sv.size(); ++i) EXPECT_NEAR(sv[i], o(i), 1e-12);
  }
}

TEST(Svd, SquaredLargestSingularValueIsSpectralRadiusOfGram) {
  std::mt19937_64 rng(18);
  for (int t = 0; t < 30; ++t) {
    const Matrix m = random_matrix(rng, 5, 4);
    const double s = sv_max(m);
    EXPECT_NEAR(s * s, spectral_radius(m.transpose() * m), 1e-11);
  }
}

TEST(LinearSolve, MatchesEigenAndReportsConditioning) {
  std::mt19937_64 rng(19);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 1 + t % 10;
    const Matrix a = random_matrix(rng, n, n) + 3.0 * Matrix::identity(n);
    const Matrix b = random_matrix(rng, n, 2);
    const Matrix x = solve_linear(a, b);
    EXPECT_LT(max_diff(x, to_eigen(a).partialPivLu().solve(to_eigen(b))), 1e-12);
    EXPECT_LT((inverse(a) * a - Matrix::identity(n)).max_abs(), 1e-12);
    EXPECT_NEAR(LuDecomposition<double>(a).determinant(), to_eigen(a).determinant(), 1e-10);
  }
  EXPECT_THROW(solve_linear(Matrix{{1, 2}, {2, 4}}, Matrix{{1}, {1}}), NumericalError);
  EXPECT_THROW(solve_linear(Matrix{{1, 0}, {0, 1e-14}}, Matrix{{1}, {1}}), NumericalError);
  EXPECT_THROW(solve_linear(Matrix(2, 2), Matrix(3, 1)), DimensionError);
}

TEST(Cholesky, FactorsPositiveDefiniteAndRejectsOthers) {
  std::mt19937_64 rng(20);
  const Matrix g = random_matrix(rng, 6, 6);
  const Matrix spd = g * g.transpose() + 0.1 * Matrix::identity(6);
  const auto l = cholesky(spd);
  ASSERT_TRUE(l.has_value());
  EXPECT_LT((*l * l->transpose() - spd).max_abs(), 1e-12);
  EXPECT_FALSE(cholesky(Matrix{{1, 2}, {2, 1}}).has_value());
  EXPECT_NEAR(lambda_min(spd), Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(to_eigen(spd)).eigenvalues()(0), 1e-12);
}
