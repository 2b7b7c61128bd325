#include "hinftrack/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hinftrack/linalg.hpp"

namespace hinftrack {

namespace {

void require_conformable(const StateSpace& ss) {
  if (!ss.A.is_square()) throw DimensionError("state matrix is not square");
  if (ss.B.rows() != ss.A.rows()) throw DimensionError("input matrix row count differs from state dimension");
  if (ss.C.cols() != ss.A.rows()) throw DimensionError("output matrix column count differs from state dimension");
}

}  // namespace

SchurCheck is_schur(const Matrix& m, double margin, const Tolerances& tol) {
  const double r = spectral_radius(m, tol);
  return {r < 1.0 - margin, r};
}

double frequency_gain(const StateSpace& ss, double theta, const Tolerances& tol) {
  require_conformable(ss);
  const std::size_t n = ss.A.rows();
  const Complex z = std::polar(1.0, theta);
  CMatrix resolvent = to_complex(-ss.A);
  for (std::size_t i = 0; i < n; ++i) resolvent(i, i) += z;
  LuDecomposition<Complex> lu(std::move(resolvent));
  if (lu.singular() || !(lu.condition_estimate() <= tol.resolvent_condition_limit)) {
    std::ostringstream os;
    os << "frequency response is ill-conditioned at theta = " << theta
       << " (resolvent condition estimate " << lu.condition_estimate() << ")";
    throw NumericalError(os.str());
  }
  const CMatrix g = to_complex(ss.C) * lu.solve(to_complex(ss.B));
  return sv_max(g, tol);
}

HinfResult hinf_grid(const StateSpace& ss, int points, const Tolerances& tol) {
  require_conformable(ss);
  if (points < 2) throw std::invalid_argument("hinf_grid: need at least two frequency points");
  HinfResult r;
  r.method = HinfMethod::kGrid;
  for (int k = 0; k < points; ++k) {
    const double theta = std::numbers::pi * k / (points - 1);
    const double g = frequency_gain(ss, theta, tol);
    if (g > r.norm) {
      r.norm = g;
      r.peak_frequency = theta;
    }
  }
  r.lower = r.norm;
  r.upper = std::numeric_limits<double>::infinity();
  return r;
}

std::vector<double> level_crossings(const StateSpace& ss, double gamma, const Tolerances& tol) {
  require_conformable(ss);
  if (!(gamma > 0.0)) throw std::invalid_argument("level_crossings: gamma must be positive");
  const std::size_t n = ss.A.rows();
  const Matrix I = Matrix::identity(n);
  const Matrix CtC = ss.C.transpose() * ss.C;
  const Matrix BBt = (1.0 / (gamma * gamma)) * (ss.B * ss.B.transpose());

  // Pencil z·L − M; unit-circle eigenvalues mark frequencies where γ is a
  // singular value of the transfer matrix.
  Matrix L(2 * n, 2 * n);
  L.set_block(0, 0, I);
  L.set_block(n, 0, CtC);
  L.set_block(n, n, ss.A.transpose());
  Matrix M(2 * n, 2 * n);
  M.set_block(0, 0, ss.A);
  M.set_block(0, n, BBt);
  M.set_block(n, n, I);

  // Shift-invert with a real shift inside the unit disk: μ = 1/(z − α).
  constexpr std::array<double, 6> kShifts{0.0, 0.31, -0.29, 0.43, -0.47, 0.17};
  double best_alpha = 0.0;
  double best_cond = std::numeric_limits<double>::infinity();
  for (double alpha : kShifts) {
    LuDecomposition<double> lu(M - alpha * L);
    if (!lu.singular() && lu.condition_estimate() < best_cond) {
      best_cond = lu.condition_estimate();
      best_alpha = alpha;
    }
    if (best_cond < 1e4) break;
  }
  if (!std::isfinite(best_cond)) {
    throw NumericalError("level_crossings: every shifted pencil is singular");
  }
  LuDecomposition<double> lu(M - best_alpha * L);
  const Matrix T = lu.solve(L);
  const Spectrum mu = eig_general(T, tol);

  std::vector<double> angles;
  for (const Complex& m : mu.eigenvalues) {
    if (std::abs(m) < 1e-12) continue;  // infinite pencil eigenvalue
    const Complex z = best_alpha + 1.0 / m;
    if (std::abs(std::abs(z) - 1.0) <= tol.unit_circle_band) {
      angles.push_back(std::abs(std::arg(z)));
    }
  }
  std::sort(angles.begin(), angles.end());
  angles.erase(std::unique(angles.begin(), angles.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               angles.end());
  return angles;
}

namespace {

struct LevelProbe {
  bool crossing = false;
  double best_gain = 0.0;
  double best_theta = 0.0;
};

// Level test at γ, confirmed by evaluating the gain at the crossing
// frequencies and between consecutive ones; crossings whose evaluated gain
// does not reach γ are treated as spurious.
LevelProbe probe_level(const StateSpace& ss, double gamma, const Tolerances& tol) {
  LevelProbe p;
  const auto angles = level_crossings(ss, gamma, tol);
  if (angles.empty()) return p;
  std::vector<double> probes = angles;
  for (std::size_t i = 0; i + 1 < angles.size(); ++i) probes.push_back(0.5 * (angles[i] + angles[i + 1]));
  for (double theta : probes) {
    const double g = frequency_gain(ss, theta, tol);
    if (g > p.best_gain) {
      p.best_gain = g;
      p.best_theta = theta;
    }
  }
  p.crossing = p.best_gain >= gamma * (1.0 - 1e-6);
  return p;
}

}  // namespace

HinfResult hinf_norm(const StateSpace& ss, double rel_tol, const Tolerances& tol) {
  require_conformable(ss);
  if (!(rel_tol > 0.0)) throw std::invalid_argument("hinf_norm: tolerance must be positive");
  const SchurCheck stab = is_schur(ss.A, tol.schur_margin, tol);
  if (!stab.stable) {
    std::ostringstream os;
    os << "hinf_norm: state matrix is not Schur stable (spectral radius " << stab.radius << ")";
    throw ModelError(os.str());
  }
  HinfResult r;
  r.method = HinfMethod::kBisection;
  if (ss.B.max_abs() == 0.0 || ss.C.max_abs() == 0.0 || ss.A.rows() == 0) return r;

  const HinfResult grid = hinf_grid(ss, tol.hinf_grid_points, tol);
  double lo = grid.norm;
  double hi = 2.0 * lo + 1.0;
  r.peak_frequency = grid.peak_frequency;

  for (int expand = 0;; ++expand) {
    const LevelProbe p = probe_level(ss, hi, tol);
    ++r.level_tests;
    if (!p.crossing) break;
    if (p.best_gain > lo) {
      lo = p.best_gain;
      r.peak_frequency = p.best_theta;
    }
    if (expand > 60) throw NumericalError("hinf_norm: could not bracket the norm");
    hi *= 2.0;
  }
  while (hi - lo > rel_tol * std::max(1.0, lo)) {
    const double mid = 0.5 * (lo + hi);
    const LevelProbe p = probe_level(ss, mid, tol);
    ++r.level_tests;
    if (p.crossing) {
      lo = std::max(mid, p.best_gain);
      if (p.best_gain >= mid) r.peak_frequency = p.best_theta;
      if (lo > hi) hi = lo;
    } else {
      hi = mid;
    }
  }
  r.lower = lo;
  r.upper = hi;
  r.norm = 0.5 * (lo + hi);
  return r;
}

namespace {

SystemCheck check_system(const StateSpace& ss, double rel_tol, const Tolerances& tol) {
  SystemCheck c;
  const SchurCheck s = is_schur(ss.A, tol.schur_margin, tol);
  c.schur = s.stable;
  c.spectral_radius = s.radius;
  if (c.schur) {
    const HinfResult h = hinf_norm(ss, rel_tol, tol);
    c.hinf_norm = h.norm;
    c.hinf_upper = h.upper;
    c.peak_frequency = h.peak_frequency;
  }
  return c;
}

void summarize(VerificationReport& rep) {
  rep.max_norm = 0.0;
  bool ok = rep.gamma > 0.0;
  for (const auto& s : rep.systems) {
    rep.max_norm = std::max(rep.max_norm, s.hinf_norm);
    ok = ok && s.schur && s.hinf_upper < rep.gamma;
  }
  rep.margin = rep.gamma - rep.max_norm;
  rep.pass = ok;
}

}  // namespace

VerificationReport verify_theorem1(const AugmentedSystem& aug, const ProtocolGain& gain,
                                   const FollowerSpectrum& spec, double gamma,
                                   const Tolerances& tol) {
  VerificationReport rep;
  rep.gamma = gamma;
  for (const StateSpace& ss : decoupled_systems(aug, gain, spec)) {
    rep.systems.push_back(check_system(ss, tol.hinf_rel_tol, tol));
  }
  summarize(rep);
  return rep;
}

VerificationReport verify_definition1(const AugmentedSystem& aug, const ProtocolGain& gain,
                                      const StochasticDecomposition& dec, double gamma,
                                      const Tolerances& tol) {
  // Both sides of the cross-check are computed well below the comparison
  // tolerance.
  const double rel = std::min(tol.hinf_rel_tol, tol.coupled_cross_check_rel) * 1e-3;
  VerificationReport rep;
  rep.gamma = gamma;
  rep.systems.push_back(check_system(coupled_error_system(aug, gain, dec), rel, tol));
  summarize(rep);

  const FollowerSpectrum spec = follower_spectrum(dec, tol);
  bool all_stable = true;
  double dec_max = 0.0;
  for (const StateSpace& ss : decoupled_systems(aug, gain, spec)) {
    const SystemCheck c = check_system(ss, rel, tol);
    all_stable = all_stable && c.schur;
    dec_max = std::max(dec_max, c.hinf_norm);
  }
  rep.has_cross_check = true;
  rep.decoupled_max_norm = dec_max;
  const SystemCheck& coupled = rep.systems.front();
  if (coupled.schur && all_stable) {
    rep.cross_check_ok = std::abs(coupled.hinf_norm - dec_max) <=
                         tol.coupled_cross_check_rel * (1.0 + coupled.hinf_norm);
  } else {
    rep.cross_check_ok = coupled.schur == all_stable;
  }
  return rep;
}

bool pbh_detectable(const Matrix& A, const Matrix& C, const Tolerances& tol) {
  if (!A.is_square()) throw DimensionError("pbh_detectable: state matrix is not square");
  if (C.cols() != A.cols()) throw DimensionError("pbh_detectable: output matrix column count differs");
  const std::size_t n = A.rows();
  const Spectrum spec = eig_general(A, tol);
  for (const Complex& lambda : spec.eigenvalues) {
    // Marginal modes are included; a defective unit eigenvalue is only
    // resolved to about sqrt(machine epsilon).
    if (std::abs(lambda) < 1.0 - 1e-6) continue;
    CMatrix stacked(n + C.rows(), n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) stacked(i, j) = (i == j ? lambda : Complex{}) - A(i, j);
    }
    for (std::size_t i = 0; i < C.rows(); ++i)
      for (std::size_t j = 0; j < n; ++j) stacked(n + i, j) = C(i, j);
    const auto sv = singular_values(stacked, tol);
    if (sv.empty() || sv.back() < tol.pbh_rank_rel * sv.front()) return false;
  }
  return true;
}

}  // namespace hinftrack
