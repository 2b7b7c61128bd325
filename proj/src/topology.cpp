#include "hinftrack/topology.hpp"

#include <cmath>
#include <deque>
#include <sstream>

namespace hinftrack {

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kNotSquare:
      return "not-square";
    case ViolationKind::kNonFinite:
      return "non-finite";
    case ViolationKind::kNegativeWeight:
      return "negative-weight";
    case ViolationKind::kSelfLoop:
      return "self-loop";
    case ViolationKind::kLeaderHasNeighbor:
      return "leader-has-neighbor";
    case ViolationKind::kAsymmetricFollowers:
      return "asymmetric-followers";
  }
  return "unknown";
}

ValidationReport validate(const Adjacency& adj, const Tolerances& tol) {
  ValidationReport report;
  const Matrix& a = adj.weights;
  auto add = [&](ViolationKind k, std::size_t i, std::size_t j, const std::string& msg) {
    report.violations.push_back({k, i, j, msg});
  };
  if (!a.is_square() || a.rows() == 0) {
    add(ViolationKind::kNotSquare, 0, 0, "adjacency matrix must be square and non-empty");
    return report;
  }
  const std::size_t n = a.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = a(i, j);
      std::ostringstream at;
      at << "(" << i + 1 << "," << j + 1 << ")";
      if (!std::isfinite(w)) {
        add(ViolationKind::kNonFinite, i + 1, j + 1, "non-finite weight at " + at.str());
        continue;
      }
      if (w < 0.0) add(ViolationKind::kNegativeWeight, i + 1, j + 1, "negative weight at " + at.str());
      if (i == j && w != 0.0) add(ViolationKind::kSelfLoop, i + 1, j + 1, "self-loop at " + at.str());
      if (i == 0 && j != 0 && w != 0.0) {
        add(ViolationKind::kLeaderHasNeighbor, i + 1, j + 1, "leader row must be zero, nonzero at " + at.str());
      }
      if (i >= 1 && j > i && std::isfinite(a(j, i)) &&
          std::abs(w - a(j, i)) > tol.follower_symmetry) {
        std::ostringstream msg;
        msg << "follower weights not symmetric: a" << at.str() << " = " << w << " but a(" << j + 1
            << "," << i + 1 << ") = " << a(j, i);
        add(ViolationKind::kAsymmetricFollowers, i + 1, j + 1, msg.str());
      }
    }
  }
  return report;
}

bool has_leader_spanning_tree(const Adjacency& adj) {
  const Matrix& a = adj.weights;
  const std::size_t n = a.rows();
  if (n == 0 || !a.is_square()) return false;
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> frontier{0};
  seen[0] = true;
  while (!frontier.empty()) {
    const std::size_t j = frontier.front();
    frontier.pop_front();
    for (std::size_t i = 0; i < n; ++i) {
      if (!seen[i] && a(i, j) > 0.0) {
        seen[i] = true;
        frontier.push_back(i);
      }
    }
  }
  for (bool s : seen)
    if (!s) return false;
  return true;
}

StochasticDecomposition build_stochastic(const Adjacency& adj, double h, const Tolerances& tol) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ModelError("build_stochastic: h must be a positive finite number");
  }
  const auto report = validate(adj, tol);
  if (!report.valid()) {
    throw ModelError("build_stochastic: invalid adjacency: " + report.violations.front().message);
  }
  const Matrix& a = adj.weights;
  const std::size_t n = a.rows();
  const std::size_t f = n - 1;

  StochasticDecomposition dec;
  dec.h = h;
  std::vector<double> row_sum(f, 0.0);
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t s = 0; s < n; ++s) row_sum[i] += a(i + 1, s);
    dec.kappa0 = std::max(dec.kappa0, row_sum[i]);
  }
  dec.kappa = dec.kappa0 + h;
  dec.delta.resize(f);
  for (std::size_t i = 0; i < f; ++i) dec.delta[i] = dec.kappa0 - row_sum[i];

  dec.D_follower = Matrix(f, f);
  dec.d_leader = Matrix(f, 1);
  for (std::size_t i = 0; i < f; ++i) {
    dec.d_leader(i, 0) = a(i + 1, 0) / dec.kappa;
    for (std::size_t j = 0; j < f; ++j) {
      dec.D_follower(i, j) =
          i == j ? (h + dec.delta[i]) / dec.kappa : a(i + 1, j + 1) / dec.kappa;
    }
  }
  dec.D = Matrix(n, n);
  dec.D(0, 0) = 1.0;
  dec.D.set_block(1, 0, dec.d_leader);
  dec.D.set_block(1, 1, dec.D_follower);
  return dec;
}

FollowerSpectrum follower_spectrum(const StochasticDecomposition& dec, const Tolerances& tol) {
  const Matrix& b = dec.D_follower;
  for (std::size_t i = 0; i < b.rows(); ++i) {
    for (std::size_t j = i + 1; j < b.cols(); ++j) {
      if (std::abs(b(i, j) - b(j, i)) > tol.follower_symmetry) {
        std::ostringstream os;
        os << "follower_spectrum: follower block not symmetric at (" << i + 2 << "," << j + 2
           << ")";
        throw ModelError(os.str());
      }
    }
  }
  FollowerSpectrum out;
  out.lambda = eig_sym(b, tol).real_values();
  for (double l : out.lambda) out.lambda0 = std::max(out.lambda0, std::abs(l));
  return out;
}

}  // namespace hinftrack
