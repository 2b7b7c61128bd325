#pragma once

// Stability, discrete-time H∞ norm, detectability, and the two tracking
// checks: per-eigenvalue decoupled systems and the coupled network error
// system.

#include <limits>
#include <vector>

#include "hinftrack/plant.hpp"
#include "hinftrack/tolerances.hpp"

namespace hinftrack {

struct SchurCheck {
  bool stable = false;
  double radius = 0.0;
};

/// Schur stable iff spectral radius < 1 − margin.
SchurCheck is_schur(const Matrix& m, double margin = default_tolerances().schur_margin,
                    const Tolerances& tol = default_tolerances());

enum class HinfMethod { kGrid, kBisection };

struct HinfResult {
  double norm = 0.0;
  double peak_frequency = 0.0;  // radians in [0, π]
  HinfMethod method = HinfMethod::kBisection;
  double lower = 0.0;
  double upper = 0.0;
  int level_tests = 0;
};

/// Largest singular value of C (e^{jθ} I − A)^{-1} B. Throws NumericalError
/// when the resolvent is too ill-conditioned to evaluate.
double frequency_gain(const StateSpace& ss, double theta, const Tolerances& tol = default_tolerances());

/// Dense-grid lower bound: `points` equally spaced frequencies on [0, π].
HinfResult hinf_grid(const StateSpace& ss, int points, const Tolerances& tol = default_tolerances());

/// Two-phase H∞ norm: grid lower bound, then bisection with an exact level
/// test until upper − lower ≤ rel_tol·max(1, lower). Requires a Schur-stable
/// state matrix (ModelError otherwise).
HinfResult hinf_norm(const StateSpace& ss, double rel_tol = default_tolerances().hinf_rel_tol,
                     const Tolerances& tol = default_tolerances());

/// Frequencies in [0, π] at which some singular value of the transfer matrix
/// equals `gamma`, from the unit-circle eigenvalues of the associated pencil.
std::vector<double> level_crossings(const StateSpace& ss, double gamma,
                                    const Tolerances& tol = default_tolerances());

struct SystemCheck {
  bool schur = false;
  double spectral_radius = 0.0;
  double hinf_norm = std::numeric_limits<double>::infinity();  // infinite when unstable
  double hinf_upper = std::numeric_limits<double>::infinity();
  double peak_frequency = 0.0;
};

struct VerificationReport {
  double gamma = 0.0;
  std::vector<SystemCheck> systems;
  double max_norm = 0.0;
  double margin = 0.0;  // γ − max norm
  bool pass = false;
  // Coupled check only: maximum over the decoupled systems and whether it
  // agrees with the coupled norm.
  bool has_cross_check = false;
  double decoupled_max_norm = 0.0;
  bool cross_check_ok = true;
};

/// Every decoupled system must be Schur stable with H∞ norm below γ.
VerificationReport verify_theorem1(const AugmentedSystem& aug, const ProtocolGain& gain,
                                   const FollowerSpectrum& spec, double gamma,
                                   const Tolerances& tol = default_tolerances());

/// The networked error system itself: Schur stable coupled state matrix and
/// coupled H∞ norm below γ, cross-checked against the decoupled maximum.
VerificationReport verify_definition1(const AugmentedSystem& aug, const ProtocolGain& gain,
                                      const StochasticDecomposition& dec, double gamma,
                                      const Tolerances& tol = default_tolerances());

/// PBH test: [λI − A; C] has full column rank for every eigenvalue with
/// |λ| ≥ 1.
bool pbh_detectable(const Matrix& A, const Matrix& C, const Tolerances& tol = default_tolerances());

}  // namespace hinftrack
