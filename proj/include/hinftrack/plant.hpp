#pragma once

// Leader, follower, sensing and protocol models, and the state-space systems
// built from them.

#include <vector>

#include "hinftrack/matrix.hpp"
#include "hinftrack/topology.hpp"

namespace hinftrack {

/// Leader state Θ = (θ_1, …, θ_n) with n blocks of size m0. The sensed output
/// is always the last block, Ĉ = (0, …, 0, I).
struct LeaderModel {
  std::size_t blocks = 1;      // n
  std::size_t block_size = 1;  // m0
  Matrix A_hat;                // n·m0 × n·m0

  std::size_t dim() const { return blocks * block_size; }
  /// Partition block Â_{sj}, 0-based indices.
  Matrix block(std::size_t s, std::size_t j) const;
  Matrix C_hat() const;
};

struct FollowerModel {
  Matrix A;    // m0 × m0
  Matrix B_w;  // m0 × mω
};

struct SensingModel {
  Matrix E;  // my × m0
};

struct AugmentedSystem {
  LeaderModel leader;
  FollowerModel follower;
  SensingModel sensing;
  Matrix C_tilde;  // my × n·m0, (0, …, 0, E)
  Matrix B_hat_w;  // n·m0 × mω, (0; …; 0; B_ω)
  Matrix A_check;  // Â_nn − A
  Matrix C_perf;   // performance output, n·m1 × n·m0

  std::size_t dim() const { return leader.dim(); }
  std::size_t m0() const { return leader.block_size; }
  std::size_t my() const { return sensing.E.rows(); }
  std::size_t mw() const { return follower.B_w.cols(); }
};

/// Throws DimensionError naming the offending field.
AugmentedSystem build_augmented(const LeaderModel& leader, const FollowerModel& follower,
                                const SensingModel& sensing, const Matrix& C_perf);

/// Stacked gain F = (F_1; …; F_n), each F_s of size m0 × my.
class ProtocolGain {
 public:
  ProtocolGain() = default;
  /// Throws DimensionError unless F is (n·m0) × my for `aug`.
  ProtocolGain(const AugmentedSystem& aug, Matrix F);

  const Matrix& matrix() const { return F_; }
  Matrix block(std::size_t s) const;  // 0-based
  std::size_t blocks() const { return blocks_; }

 private:
  Matrix F_;
  std::size_t blocks_ = 0;
  std::size_t block_size_ = 0;
};

/// x⁺ = A x + B w, e = C x. `output_advanced` records that the performance
/// output is read one step ahead, e(k+1) = C x(k+1); the frequency-domain
/// analysis ignores it because |z| = 1 on the unit circle.
struct StateSpace {
  Matrix A;
  Matrix B;
  Matrix C;
  bool output_advanced = true;

  std::size_t states() const { return A.rows(); }
};

struct ProtocolOutput {
  Matrix u;       // m0 × 1
  Matrix z_next;  // (n−1)·m0 × 1
};

/// One step of a follower's local controller and distributed estimator.
/// `z` stores the n−1 estimator blocks contiguously.
ProtocolOutput protocol_step(const AugmentedSystem& aug, const ProtocolGain& gain, const Matrix& x,
                             const Matrix& z, const Matrix& eps);

/// Scaled relative output information for every follower; `x[i]` is the state
/// of follower i+2, `theta_n` the leader's last block.
std::vector<Matrix> relative_information(const Adjacency& adj, const StochasticDecomposition& dec,
                                         const SensingModel& sensing, const std::vector<Matrix>& x,
                                         const Matrix& theta_n);

/// One system (Â − (1 − λ_i) F C̃, B̂_ω, C) per follower-block eigenvalue.
std::vector<StateSpace> decoupled_systems(const AugmentedSystem& aug, const ProtocolGain& gain,
                                          const FollowerSpectrum& spec);

/// Networked tracking-error system over all followers.
StateSpace coupled_error_system(const AugmentedSystem& aug, const ProtocolGain& gain,
                                const StochasticDecomposition& dec);

}  // namespace hinftrack
