#pragma once

// Time-domain simulation of the leader, the followers and their estimators,
// plus tracking-error and energy series.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hinftrack/plant.hpp"
#include "hinftrack/topology.hpp"

namespace hinftrack {

enum class DisturbanceKind { kNone, kPaperSine, kTable };

/// kPaperSine: ω_i(k) = amplitude·sin(i·(k−1)) for 0 ≤ k ≤ window_end, else 0,
/// replicated over every disturbance channel. kTable: table[k][i−2] is the
/// full mω-vector for follower i at step k.
struct DisturbanceSpec {
  DisturbanceKind kind = DisturbanceKind::kNone;
  double amplitude = 25.0;
  long window_end = 200;
  std::vector<std::vector<Matrix>> table;
};

/// `i` is the 1-based node index (followers are 2…N). Throws
/// std::out_of_range for table lookups outside the table.
Matrix disturbance(std::size_t i, long k, std::size_t mw, const DisturbanceSpec& spec);

struct SimConfig {
  long horizon = 400;
  std::optional<Matrix> theta0;          // n·m0 × 1; seeded uniform(−1, 1) when absent
  std::optional<std::vector<Matrix>> x0; // per follower, m0 × 1; seeded when absent
  std::optional<std::vector<Matrix>> z0; // per follower, (n−1)·m0 × 1; zero when absent
  DisturbanceSpec disturbance;
  std::uint64_t seed = 2024;
};

/// Every series has horizon + 1 entries indexed by k. Per-follower series are
/// indexed [k][i] with i = 0 for node 2.
struct Trajectories {
  std::vector<Matrix> theta;                 // Θ(k)
  std::vector<std::vector<Matrix>> zeta;     // ζ_i(k) = (z_i¹, …, z_i^{n−1}, x_i)
  std::vector<std::vector<Matrix>> rho;      // ζ_i(k) − Θ(k)
  std::vector<std::vector<Matrix>> eps;      // ε_i(k)
  std::vector<std::vector<Matrix>> u;        // u_i(k)
  std::vector<std::vector<Matrix>> omega;    // ω_i(k)
  std::vector<Matrix> e;                     // (I⊗C)ρ(k), stacked over followers

  std::size_t steps() const { return theta.size(); }
};

/// Runs the closed loop for `config.horizon` steps. Throws DimensionError on
/// inconsistent inputs and NumericalError naming the first step with a
/// non-finite state.
Trajectories simulate(const Adjacency& adj, const StochasticDecomposition& dec,
                      const AugmentedSystem& aug, const ProtocolGain& gain, const SimConfig& config);

/// E(k) = Σ_i ‖ζ_i(k) − Θ(k)‖².
std::vector<double> tracking_error(const Trajectories& traj);

struct EnergyCurves {
  std::vector<double> output;       // Σ_{k≤T} ‖e(k)‖²
  std::vector<double> disturbance;  // γ² Σ_{k≤T} ‖ω(k)‖²
};

EnergyCurves energy_curves(const Trajectories& traj, double gamma);

/// First k with E(j) < threshold for every j ≥ k within the run, if any.
std::optional<long> settling_step(const std::vector<double>& E, double threshold);

/// CSV with columns k, theta_*, zeta_<i>_<c>, e_*, E, energy_e, energy_w
/// (17 significant digits).
std::string trajectories_csv(const Trajectories& traj, double gamma);

}  // namespace hinftrack

namespace hinftrack {

/// Decay horizon estimates for the unforced error recursion ρ⁺ = A ρ with
/// E(0) = ‖ρ(0)‖².
struct DecayPrediction {
  double spectral_radius = 0.0;
  long asymptotic = -1;  // ⌈log(threshold/E0) / (2 log r)⌉, ignores transients
  long bound = -1;       // first k with ‖A^k‖₂² E0 < threshold; rigorous, −1 if not reached
};

DecayPrediction predict_decay(const Matrix& A, double E0, double threshold, long max_steps,
                              const Tolerances& tol = default_tolerances());

}  // namespace hinftrack
