#pragma once

// Communication graph of a leader (node 1) and N-1 followers: validation
// against the standing assumptions, leader-rooted spanning tree test, and the
// scaled row-stochastic matrix with its follower block spectrum.

#include <string>
#include <vector>

#include "hinftrack/linalg.hpp"
#include "hinftrack/matrix.hpp"

namespace hinftrack {

/// Weighted adjacency matrix, a(i,j) = weight of the edge j -> i. Index 0 is
/// the leader. a(i,0) for i >= 1 is the leader-sensing gain c_i.
struct Adjacency {
  Matrix weights;

  std::size_t agents() const { return weights.rows(); }
  std::size_t followers() const { return weights.rows() == 0 ? 0 : weights.rows() - 1; }
};

enum class ViolationKind { kNotSquare, kNonFinite, kNegativeWeight, kSelfLoop, kLeaderHasNeighbor, kAsymmetricFollowers };

struct Violation {
  ViolationKind kind;
  std::size_t i = 0;  // 1-based node indices, as in the usual graph notation
  std::size_t j = 0;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool valid() const { return violations.empty(); }
};

ValidationReport validate(const Adjacency& adj, const Tolerances& tol = default_tolerances());

/// True iff every follower is reachable from the leader along edges j -> i
/// with a(i,j) > 0.
bool has_leader_spanning_tree(const Adjacency& adj);

struct StochasticDecomposition {
  double h = 0.0;
  double kappa0 = 0.0;       // max over followers of the full row sum
  double kappa = 0.0;        // kappa0 + h
  std::vector<double> delta; // per follower: kappa0 - row sum
  Matrix D;                  // N x N, row-stochastic
  Matrix D_follower;         // (N-1) x (N-1) follower block
  Matrix d_leader;           // (N-1) x 1 leader column
};

/// Throws ModelError for h <= 0 or an invalid adjacency.
StochasticDecomposition build_stochastic(const Adjacency& adj, double h,
                                         const Tolerances& tol = default_tolerances());

struct FollowerSpectrum {
  std::vector<double> lambda;  // ascending
  double lambda0 = 0.0;        // max |lambda_i|
};

/// Eigenvalues of the follower block. Throws ModelError when the block is not
/// symmetric (followers' links are directed).
FollowerSpectrum follower_spectrum(const StochasticDecomposition& dec,
                                   const Tolerances& tol = default_tolerances());

std::string to_string(ViolationKind kind);

}  // namespace hinftrack
