#pragma once

// Gain synthesis: the two matrix inequalities in (P, V, ε), a feasibility
// solver, F = P⁻¹V, and an independent re-check of the result.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hinftrack/analysis.hpp"
#include "hinftrack/plant.hpp"

namespace hinftrack {

struct LmiVariables {
  Matrix P;          // n·m0 × n·m0, symmetric
  Matrix V;          // n·m0 × my
  double eps = 1.0;  // ε > 0
};

/// Block matrix that must be negative definite:
///   [ −P   PÂ−VC̃                      PB̂_ω   V   ]
///   [  ⋆   −P + CᵀC/γ² + ελ0²C̃ᵀC̃      0      0   ]
///   [  ⋆    ⋆                          −I     0   ]
///   [  ⋆    ⋆                           ⋆    −εI  ]
Matrix assemble_lmi12(const LmiVariables& vars, double gamma, double lambda0,
                      const AugmentedSystem& aug);

/// Block matrix that must be positive definite: [ I  C ; Cᵀ  γ²P ].
Matrix assemble_lmi13(const LmiVariables& vars, double gamma, const AugmentedSystem& aug);

/// Distances from the strict inequalities; all positive for a valid point.
struct LmiMargins {
  double lmi12 = 0.0;  // −λmax(LMI12)
  double lmi13 = 0.0;  // λmin(LMI13)
  double P = 0.0;      // λmin(P)
  double eps = 0.0;    // ε

  double min() const;
  bool all_at_least(double mu) const { return min() >= mu; }
};

LmiMargins lmi_margins(const LmiVariables& vars, double gamma, double lambda0,
                       const AugmentedSystem& aug, const Tolerances& tol = default_tolerances());

enum class SolverMethod {
  kBarrier,     // log-det barrier path following on the common margin
  kSubgradient  // nonsmooth max-eigenvalue descent with Polyak steps and restarts
};

struct SolverOptions {
  SolverMethod method = SolverMethod::kBarrier;
  int max_iterations = 4000;   // Newton steps in total, or subgradient steps per restart
  double margin_target = 1e-6; // μ: success means every margin ≥ μ
  std::optional<double> fixed_eps;  // ε held fixed when set

  // Barrier schedule.
  double margin_safety = 10.0;  // stop once the common margin reaches safety·μ
  double barrier_initial_weight = 1.0;
  double barrier_growth = 8.0;
  double variable_bound = 1e6;  // ‖(P, V, ε)‖ < bound keeps the barrier bounded

  // Subgradient schedule.
  double polyak_target = 2.0;   // aim at φ = −polyak_target·μ
  int restarts = 4;
  double restart_scale = 0.5;
  std::uint64_t seed = 1;
};

struct SynthesisCertificate {
  LmiVariables variables;
  ProtocolGain gain;
  double gamma = 0.0;
  double lambda0 = 0.0;
  LmiMargins margins;
};

enum class SynthesisStatus { kFeasible, kNotFound, kNumericalBreakdown };

struct SynthesisOutcome {
  SynthesisStatus status = SynthesisStatus::kNotFound;
  std::optional<SynthesisCertificate> certificate;
  double best_phi = 0.0;  // max(λmax(LMI12), −λmin(LMI13), −λmin(P), −ε) at the best point
  int iterations = 0;
  int restarts_used = 0;
  bool detectable = true;  // PBH result for (C̃, Â); infeasibility is likely when false
  std::string message;

  bool feasible() const { return status == SynthesisStatus::kFeasible; }
};

/// Search for (P, V, ε) satisfying both inequalities with margin μ. A
/// kNotFound outcome means nothing was found within budget; it is not a proof
/// of infeasibility.
SynthesisOutcome solve_feasibility(const AugmentedSystem& aug, double gamma, double lambda0,
                                   const SolverOptions& opts = {},
                                   const Tolerances& tol = default_tolerances());

/// F = P⁻¹V. Throws ModelError when P is not positive definite.
ProtocolGain compute_gain(const LmiVariables& vars, const AugmentedSystem& aug,
                          const Tolerances& tol = default_tolerances());

struct CertificationReport {
  LmiMargins margins;
  bool margins_ok = false;
  VerificationReport decoupled;  // per-eigenvalue systems
  VerificationReport coupled;    // network error system
  bool pass = false;
};

/// Recomputes the margins from the stored variables, then verifies the stored
/// gain on both the decoupled and the coupled systems at γ.
CertificationReport certify(const SynthesisCertificate& cert, const AugmentedSystem& aug,
                            const StochasticDecomposition& dec, double gamma,
                            double margin = default_tolerances().lmi_margin,
                            const Tolerances& tol = default_tolerances());

struct GammaSearchStep {
  double gamma;
  bool feasible;
};

struct GammaSearch {
  std::optional<SynthesisCertificate> best;  // certificate at the smallest feasible γ
  double lower = 0.0;                        // largest γ tried without success
  double upper = 0.0;                        // smallest feasible γ
  std::vector<GammaSearchStep> log;
};

/// Bisection on γ around solve_feasibility until upper − lower ≤ rel_tol·upper.
/// Starts from `gamma_hi`, doubling it until feasible.
GammaSearch minimize_gamma(const AugmentedSystem& aug, double lambda0, double gamma_hi,
                           double rel_tol = 1e-3, const SolverOptions& opts = {},
                           const Tolerances& tol = default_tolerances());

}  // namespace hinftrack
