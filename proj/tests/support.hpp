#pragma once

// Shared fixtures for the test suites: the worked example, random instance
// generators and conversions to Eigen for oracle checks.

#include <Eigen/Dense>

#include <complex>
#include <random>

#include "hinftrack/linalg.hpp"
#include "hinftrack/plant.hpp"
#include "hinftrack/topology.hpp"

namespace testsupport {

using hinftrack::Matrix;

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

inline Matrix from_eigen(const Eigen::MatrixXd& e) {
  Matrix m(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
  return m;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = u(rng);
  return m;
}

/// Random matrix rescaled (by Eigen's eigen-solver) to the given spectral radius.
inline Matrix random_with_radius(std::mt19937_64& rng, std::size_t n, double radius) {
  Matrix a = random_matrix(rng, n, n);
  const double r = Eigen::EigenSolver<Eigen::MatrixXd>(to_eigen(a)).eigenvalues().cwiseAbs().maxCoeff();
  return (r > 0.0 ? radius / r : 1.0) * a;
}

// Oracle: σmax(C (e^{jθ} I − A)⁻¹ B) through Eigen.
inline double eigen_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& C,
                         double theta) {
  using CM = Eigen::MatrixXcd;
  const std::complex<double> z = std::polar(1.0, theta);
  CM M = z * CM::Identity(A.rows(), A.cols()) - A.cast<std::complex<double>>();
  CM G = C.cast<std::complex<double>>() * M.partialPivLu().solve(B.cast<std::complex<double>>());
  return Eigen::JacobiSVD<CM>(G).singularValues()(0);
}

// Oracle H∞ norm: dense grid followed by golden-section refinement around
// the best few grid points.
inline double eigen_hinf(const Matrix& a, const Matrix& b, const Matrix& c, int grid = 20000) {
  const Eigen::MatrixXd A = to_eigen(a), B = to_eigen(b), C = to_eigen(c);
  const double pi = 3.14159265358979323846;
  std::vector<std::pair<double, int>> vals;
  for (int k = 0; k <= grid; ++k) vals.emplace_back(eigen_gain(A, B, C, pi * k / grid), k);
  std::sort(vals.begin(), vals.end(), [](auto& x, auto& y) { return x.first > y.first; });
  double best = vals.front().first;
  for (int t = 0; t < 6 && t < static_cast<int>(vals.size()); ++t) {
    double lo = pi * std::max(0, vals[t].second - 1) / grid;
    double hi = pi * std::min(grid, vals[t].second + 1) / grid;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = eigen_gain(A, B, C, x1), f2 = eigen_gain(A, B, C, x2);
    for (int it = 0; it < 100; ++it) {
      if (f1 > f2) {
        hi = x2, x2 = x1, f2 = f1, x1 = hi - g * (hi - lo), f1 = eigen_gain(A, B, C, x1);
      } else {
        lo = x1, x1 = x2, f1 = f2, x2 = lo + g * (hi - lo), f2 = eigen_gain(A, B, C, x2);
      }
    }
    best = std::max({best, f1, f2});
  }
  return best;
}

struct Example {
  hinftrack::Adjacency adj;
  hinftrack::StochasticDecomposition dec;
  hinftrack::FollowerSpectrum spec;
  hinftrack::AugmentedSystem aug;
  hinftrack::ProtocolGain reference_gain;
};

/// The worked example with follower A = 0.8 (the closed loop does not depend on A).
inline Example worked_example(double follower_a = 0.8) {
  using namespace hinftrack;
  Example ex;
  ex.adj.weights = Matrix{{0, 0, 0, 0, 0}, {1.2, 0, 2, 0, 0}, {0, 2, 0, 0, 0}, {1.5, 0, 0, 0, 1.9}, {0, 0, 0, 1.9, 0}};
  ex.dec = build_stochastic(ex.adj, 0.2);
  ex.spec = follower_spectrum(ex.dec);
  LeaderModel leader{3, 1, Matrix{{1, 0, 0}, {1, 1, 0}, {1, 1, 0.5}}};
  ex.aug = build_augmented(leader, {Matrix{{follower_a}}, Matrix{{1.5}}}, {Matrix{{1.0}}}, 0.15 * Matrix::identity(3));
  ex.reference_gain = ProtocolGain(ex.aug, Matrix{{0.0003}, {0.0551}, {0.4660}});
  return ex;
}

/// Random connected topology: symmetric follower weights, at least one
/// leader link, every follower reachable from the leader.
inline hinftrack::Adjacency random_topology(std::mt19937_64& rng, std::size_t followers) {
  std::uniform_real_distribution<double> w(0.2, 2.5);
  std::bernoulli_distribution coin(0.5);
  const std::size_t n = followers + 1;
  hinftrack::Adjacency adj{Matrix(n, n)};
  // Random spanning tree rooted at the leader.
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> parent(0, i - 1);
    const std::size_t p = parent(rng);
    const double v = w(rng);
    adj.weights(i, p) = v;
    if (p != 0) adj.weights(p, i) = v;
  }
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (adj.weights(i, j) == 0.0 && coin(rng)) adj.weights(i, j) = adj.weights(j, i) = w(rng);
    }
    if (adj.weights(i, 0) == 0.0 && coin(rng) && coin(rng)) adj.weights(i, 0) = w(rng);
  }
  return adj;
}

}  // namespace testsupport
