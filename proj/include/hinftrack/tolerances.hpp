#pragma once

namespace hinftrack {

// Every numerical threshold used across the library lives here so that the
// defaults can be audited in one place.
struct Tolerances {
  // Kernel
  double symmetry = 1e-10;          // eig_sym input symmetry check (relative to max |entry|)
  double condition_limit = 1e12;    // solve_linear refuses above this 1-norm condition estimate
  int jacobi_max_sweeps = 100;
  int qr_max_iterations_per_eig = 60;
  int svd_max_sweeps = 80;

  // Topology
  double stochastic_row_sum = 1e-12;
  double follower_symmetry = 1e-12;

  // Analysis
  double schur_margin = 1e-9;
  double hinf_rel_tol = 1e-6;
  int hinf_grid_points = 4096;
  double unit_circle_band = 1e-7;   // | |z| - 1 | below this counts as unimodular
  double resolvent_condition_limit = 1e14;
  double pbh_rank_rel = 1e-9;
  double coupled_cross_check_rel = 1e-6;

  // Synthesis
  double lmi_margin = 1e-6;
};

/// Library-wide defaults.
inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

}  // namespace hinftrack
