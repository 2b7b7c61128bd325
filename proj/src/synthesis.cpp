#include "hinftrack/synthesis.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <random>
#include <sstream>

#include "hinftrack/linalg.hpp"

namespace hinftrack {

Matrix assemble_lmi12(const LmiVariables& vars, double gamma, double lambda0,
                      const AugmentedSystem& aug) {
  const std::size_t d = aug.dim();
  const std::size_t mw = aug.mw();
  const std::size_t my = aug.my();
  if (vars.P.rows() != d || vars.P.cols() != d) throw DimensionError("LMI: P has the wrong shape");
  if (vars.V.rows() != d || vars.V.cols() != my) throw DimensionError("LMI: V has the wrong shape");
  if (!(gamma > 0.0)) throw std::invalid_argument("LMI: gamma must be positive");

  const Matrix& P = vars.P;
  const Matrix top = P * aug.leader.A_hat - vars.V * aug.C_tilde;
  const Matrix PB = P * aug.B_hat_w;
  Matrix d22 = -P + (1.0 / (gamma * gamma)) * (aug.C_perf.transpose() * aug.C_perf) +
               (vars.eps * lambda0 * lambda0) * (aug.C_tilde.transpose() * aug.C_tilde);

  Matrix m(2 * d + mw + my, 2 * d + mw + my);
  m.set_block(0, 0, -P);
  m.set_block(0, d, top);
  m.set_block(d, 0, top.transpose());
  m.set_block(0, 2 * d, PB);
  m.set_block(2 * d, 0, PB.transpose());
  m.set_block(0, 2 * d + mw, vars.V);
  m.set_block(2 * d + mw, 0, vars.V.transpose());
  m.set_block(d, d, d22);
  m.set_block(2 * d, 2 * d, -Matrix::identity(mw));
  m.set_block(2 * d + mw, 2 * d + mw, -vars.eps * Matrix::identity(my));
  // The (2,2) block is symmetric in exact arithmetic; make it exactly so.
  for (std::size_t i = d; i < 2 * d; ++i)
    for (std::size_t j = i + 1; j < 2 * d; ++j) m(i, j) = m(j, i) = 0.5 * (m(i, j) + m(j, i));
  return m;
}

Matrix assemble_lmi13(const LmiVariables& vars, double gamma, const AugmentedSystem& aug) {
  const std::size_t d = aug.dim();
  if (vars.P.rows() != d || vars.P.cols() != d) throw DimensionError("LMI: P has the wrong shape");
  const Matrix& C = aug.C_perf;
  const std::size_t p = C.rows();
  Matrix m(p + d, p + d);
  m.set_block(0, 0, Matrix::identity(p));
  m.set_block(0, p, C);
  m.set_block(p, 0, C.transpose());
  m.set_block(p, p, (gamma * gamma) * vars.P);
  return m;
}

double LmiMargins::min() const { return std::min({lmi12, lmi13, P, eps}); }

LmiMargins lmi_margins(const LmiVariables& vars, double gamma, double lambda0,
                       const AugmentedSystem& aug, const Tolerances& tol) {
  LmiMargins m;
  m.lmi12 = -lambda_max(assemble_lmi12(vars, gamma, lambda0, aug), tol);
  m.lmi13 = lambda_min(assemble_lmi13(vars, gamma, aug), tol);
  m.P = lambda_min(vars.P, tol);
  m.eps = vars.eps;
  return m;
}

ProtocolGain compute_gain(const LmiVariables& vars, const AugmentedSystem& aug,
                          const Tolerances& tol) {
  if (!cholesky(vars.P)) throw ModelError("compute_gain: P is not positive definite");
  return ProtocolGain(aug, solve_linear(vars.P, vars.V, tol));
}

namespace {

// Affine parametrization of the constraint blocks, each of which must be
// positive definite: −LMI12, LMI13, P and (when free) ε.
// Variables: upper triangle of P row by row, V row-major, then ε if free.
class LmiProblem {
 public:
  LmiProblem(const AugmentedSystem& aug, double gamma, double lambda0, std::optional<double> eps)
      : aug_(aug), gamma_(gamma), lambda0_(lambda0), fixed_eps_(eps) {
    d_ = aug.dim();
    nvars_ = d_ * (d_ + 1) / 2 + d_ * aug.my() + (fixed_eps_ ? 0 : 1);
    const std::vector<double> zero(nvars_, 0.0);
    base_ = raw_blocks(zero);
    coef_.resize(nvars_);
    std::vector<double> e(nvars_, 0.0);
    for (std::size_t i = 0; i < nvars_; ++i) {
      e[i] = 1.0;
      coef_[i] = raw_blocks(e);
      for (std::size_t k = 0; k < coef_[i].size(); ++k) coef_[i][k] -= base_[k];
      e[i] = 0.0;
    }
  }

  std::size_t vars() const { return nvars_; }
  std::size_t block_count() const { return base_.size(); }
  const Matrix& coef(std::size_t var, std::size_t block) const { return coef_[var][block]; }
  std::size_t barrier_dimension() const {
    std::size_t s = 0;
    for (const auto& b : base_) s += b.rows();
    return s;
  }

  LmiVariables unpack(std::span<const double> x) const {
    LmiVariables v;
    v.P = Matrix(d_, d_);
    std::size_t k = 0;
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t j = i; j < d_; ++j) v.P(i, j) = v.P(j, i) = x[k++];
    v.V = Matrix(d_, aug_.my());
    for (std::size_t i = 0; i < v.V.size(); ++i) v.V[i] = x[k++];
    v.eps = fixed_eps_ ? *fixed_eps_ : x[k];
    return v;
  }

  std::vector<double> pack(const LmiVariables& v) const {
    std::vector<double> x;
    x.reserve(nvars_);
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t j = i; j < d_; ++j) x.push_back(v.P(i, j));
    for (std::size_t i = 0; i < v.V.size(); ++i) x.push_back(v.V[i]);
    if (!fixed_eps_) x.push_back(v.eps);
    return x;
  }

  // Blocks via the affine expansion, consistent with the derivatives.
  std::vector<Matrix> blocks(std::span<const double> x) const {
    std::vector<Matrix> out = base_;
    for (std::size_t i = 0; i < nvars_; ++i) {
      if (x[i] == 0.0) continue;
      for (std::size_t k = 0; k < out.size(); ++k) simd::axpy(x[i], coef_[i][k].data(), out[k].data());
    }
    return out;
  }

  LmiVariables initial_point() const {
    LmiVariables v;
    v.P = Matrix::identity(d_);
    v.V = Matrix(d_, aug_.my());
    v.eps = fixed_eps_ ? *fixed_eps_ : 1.0;
    return v;
  }

  double gamma() const { return gamma_; }
  double lambda0() const { return lambda0_; }
  const AugmentedSystem& aug() const { return aug_; }

 private:
  std::vector<Matrix> raw_blocks(std::span<const double> x) const {
    const LmiVariables v = unpack(x);
    std::vector<Matrix> out;
    out.push_back(-assemble_lmi12(v, gamma_, lambda0_, aug_));
    out.push_back(assemble_lmi13(v, gamma_, aug_));
    out.push_back(v.P);
    if (!fixed_eps_) out.push_back(Matrix(1, 1, v.eps));
    return out;
  }

  const AugmentedSystem& aug_;
  double gamma_;
  double lambda0_;
  std::optional<double> fixed_eps_;
  std::size_t d_ = 0;
  std::size_t nvars_ = 0;
  std::vector<Matrix> base_;
  std::vector<std::vector<Matrix>> coef_;
};

double phi_of(const LmiMargins& m) { return -m.min(); }

// Builds the certificate for a candidate point; nullopt when the recomputed
// margins fall short of μ.
std::optional<SynthesisCertificate> try_certificate(const LmiProblem& prob,
                                                    std::span<const double> x, double mu,
                                                    const Tolerances& tol, double& phi_out) {
  const LmiVariables v = prob.unpack(x);
  const LmiMargins m = lmi_margins(v, prob.gamma(), prob.lambda0(), prob.aug(), tol);
  phi_out = phi_of(m);
  if (!m.all_at_least(mu)) return std::nullopt;
  SynthesisCertificate cert;
  cert.variables = v;
  cert.gain = compute_gain(v, prob.aug(), tol);
  cert.gamma = prob.gamma();
  cert.lambda0 = prob.lambda0();
  cert.margins = m;
  return cert;
}

double log_det_pd(const Matrix& s, bool& ok) {
  const auto l = cholesky(s);
  if (!l) {
    ok = false;
    return 0.0;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < l->rows(); ++i) acc += std::log((*l)(i, i));
  return 2.0 * acc;
}

Matrix shifted(const Matrix& b, double t) {
  Matrix s = b;
  for (std::size_t i = 0; i < s.rows(); ++i) s(i, i) -= t;
  return s;
}

Matrix spd_inverse(const Matrix& l) {
  // Inverse from a lower Cholesky factor, column by column.
  const std::size_t n = l.rows();
  Matrix inv(n, n);
  std::vector<double> y(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = i == c ? 1.0 : 0.0;
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
      y[i] = s / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * inv(k, c);
      inv(ii, c) = s / l(ii, ii);
    }
  }
  return inv;
}

// Solve H d = r for symmetric positive definite H, adding a small diagonal
// shift if the factorization breaks down.
std::optional<std::vector<double>> spd_solve(Matrix h, std::span<const double> r) {
  const std::size_t n = h.rows();
  double shift = 0.0;
  const double scale = std::max(1e-300, h.max_abs());
  for (int attempt = 0; attempt < 8; ++attempt) {
    Matrix hs = h;
    for (std::size_t i = 0; i < n; ++i) hs(i, i) += shift;
    if (auto l = cholesky(hs)) {
      std::vector<double> y(n), d(n);
      for (std::size_t i = 0; i < n; ++i) {
        double s = r[i];
        for (std::size_t k = 0; k < i; ++k) s -= (*l)(i, k) * y[k];
        y[i] = s / (*l)(i, i);
      }
      for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= (*l)(k, ii) * d[k];
        d[ii] = s / (*l)(ii, ii);
      }
      return d;
    }
    shift = shift == 0.0 ? 1e-14 * scale : shift * 100.0;
  }
  return std::nullopt;
}

SynthesisOutcome run_barrier(const LmiProblem& prob, const SolverOptions& opts,
                             const Tolerances& tol) {
  SynthesisOutcome out;
  const double mu = opts.margin_target;
  const double target = std::max(mu, opts.margin_safety * mu);
  const std::size_t m = prob.vars();
  const std::size_t nb = prob.block_count();
  const double r2 = opts.variable_bound * opts.variable_bound;
  const double nu = static_cast<double>(prob.barrier_dimension() + 1);

  std::vector<double> x = prob.pack(prob.initial_point());
  double t = 0.0;
  {
    const auto blocks = prob.blocks(x);
    double lmin = std::numeric_limits<double>::infinity();
    double scale = 1.0;
    for (const auto& b : blocks) {
      lmin = std::min(lmin, lambda_min(b, tol));
      scale = std::max(scale, b.max_abs());
    }
    // Keep the start strictly interior even when the data are badly scaled.
    t = lmin - 1.0 - 1e-8 * scale;
  }
  double xx = 0.0;
  for (double v : x) xx += v * v;
  if (xx >= r2) {
    out.status = SynthesisStatus::kNumericalBreakdown;
    out.message = "initial point lies outside the variable bound";
    return out;
  }
  out.best_phi = -t;

  // Barrier value at (x, t) with weight c; nullopt outside the domain.
  auto value = [&](std::span<const double> xv, double tv, double c) -> std::optional<double> {
    double q = r2;
    for (double v : xv) q -= v * v;
    if (!(q > 0.0)) return std::nullopt;
    double f = -c * tv - std::log(q);
    const auto blocks = prob.blocks(xv);
    for (const auto& b : blocks) {
      bool ok = true;
      const double ld = log_det_pd(shifted(b, tv), ok);
      if (!ok) return std::nullopt;
      f -= ld;
    }
    return f;
  };

  double c = opts.barrier_initial_weight;
  const std::size_t dim = m + 1;  // (x, t)
  while (out.iterations < opts.max_iterations) {
    for (int inner = 0; inner < 200 && out.iterations < opts.max_iterations; ++inner) {
      const auto blocks = prob.blocks(x);
      std::vector<double> g(dim, 0.0);
      Matrix H(dim, dim);
      for (std::size_t k = 0; k < nb; ++k) {
        const auto l = cholesky(shifted(blocks[k], t));
        if (!l) {
          out.status = SynthesisStatus::kNumericalBreakdown;
          out.message = "iterate left the interior of the constraint set";
          return out;
        }
        const Matrix sinv = spd_inverse(*l);
        // W_i = S⁻¹ D_i; stored transposed so tr(W_i W_j) is a flat dot product.
        std::vector<Matrix> w(dim);
        std::vector<Matrix> wt(dim);
        for (std::size_t i = 0; i < m; ++i) {
          w[i] = sinv * prob.coef(i, k);
          wt[i] = w[i].transpose();
        }
        w[m] = -sinv;
        wt[m] = w[m];  // symmetric
        for (std::size_t i = 0; i < dim; ++i) {
          if (w[i].max_abs() == 0.0) continue;
          g[i] -= trace(w[i]);
          for (std::size_t j = i; j < dim; ++j) {
            const double hij = simd::dot(w[i].data(), wt[j].data());
            H(i, j) += hij;
            if (j != i) H(j, i) += hij;
          }
        }
      }
      double q = r2;
      for (double v : x) q -= v * v;
      for (std::size_t i = 0; i < m; ++i) {
        g[i] += 2.0 * x[i] / q;
        H(i, i) += 2.0 / q;
        for (std::size_t j = 0; j < m; ++j) H(i, j) += 4.0 * x[i] * x[j] / (q * q);
      }
      g[m] -= c;

      std::vector<double> neg_g(dim);
      for (std::size_t i = 0; i < dim; ++i) neg_g[i] = -g[i];
      const auto step = spd_solve(H, neg_g);
      if (!step) {
        out.status = SynthesisStatus::kNumericalBreakdown;
        out.message = "Newton system could not be solved";
        return out;
      }
      double decrement = 0.0;
      for (std::size_t i = 0; i < dim; ++i) decrement -= g[i] * (*step)[i];
      if (!std::isfinite(decrement)) {
        out.status = SynthesisStatus::kNumericalBreakdown;
        out.message = "non-finite Newton decrement";
        return out;
      }
      if (decrement < 1e-10) break;

      const auto f0 = value(x, t, c);
      double s = 1.0;
      std::vector<double> xn(m);
      double tn = t;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, s *= 0.5) {
        for (std::size_t i = 0; i < m; ++i) xn[i] = x[i] + s * (*step)[i];
        tn = t + s * (*step)[m];
        const auto f1 = value(xn, tn, c);
        if (f1 && f0 && *f1 <= *f0 - 0.25 * s * decrement) {
          moved = true;
          break;
        }
      }
      ++out.iterations;
      if (!moved) break;  // no further progress at this weight
      x = xn;
      t = tn;
      out.best_phi = std::min(out.best_phi, -t);

      if (t >= target) {
        double phi = 0.0;
        auto cert = try_certificate(prob, x, mu, tol, phi);
        out.best_phi = std::min(out.best_phi, phi);
        if (cert) {
          out.status = SynthesisStatus::kFeasible;
          out.certificate = std::move(cert);
          out.message = "margin target reached";
          return out;
        }
      }
    }
    // Along the central path the optimal margin exceeds t by at most ν/c.
    if (t + nu / c < mu) {
      out.status = SynthesisStatus::kNotFound;
      std::ostringstream os;
      os << "largest attainable margin within the variable bound is below the target (about "
         << t << ")";
      out.message = os.str();
      return out;
    }
    if (nu / c < 1e-14 * std::max(1.0, std::abs(t))) break;
    c *= opts.barrier_growth;
  }
  // The final iterate may still qualify even if the target margin was not hit.
  if (t >= mu) {
    double phi = 0.0;
    if (auto cert = try_certificate(prob, x, mu, tol, phi)) {
      out.status = SynthesisStatus::kFeasible;
      out.certificate = std::move(cert);
      out.message = "margin reached at the end of the schedule";
      return out;
    }
  }
  out.status = SynthesisStatus::kNotFound;
  out.message = "iteration budget exhausted";
  return out;
}

SynthesisOutcome run_subgradient(const LmiProblem& prob, const SolverOptions& opts,
                                 const Tolerances& tol) {
  SynthesisOutcome out;
  const double mu = opts.margin_target;
  const double phi_target = -opts.polyak_target * mu;
  const std::size_t m = prob.vars();
  const std::vector<double> x0 = prob.pack(prob.initial_point());
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  out.best_phi = std::numeric_limits<double>::infinity();

  for (int r = 0; r <= opts.restarts; ++r) {
    std::vector<double> x = x0;
    if (r > 0) {
      for (auto& v : x) v += opts.restart_scale * normal(rng);
    }
    out.restarts_used = r;
    for (int it = 0; it < opts.max_iterations; ++it) {
      ++out.iterations;
      const auto blocks = prob.blocks(x);
      double phi = -std::numeric_limits<double>::infinity();
      std::size_t active = 0;
      Matrix v;
      for (std::size_t k = 0; k < blocks.size(); ++k) {
        const SymmetricEigen e = eig_sym_decompose(blocks[k], tol);
        if (-e.values.front() > phi) {
          phi = -e.values.front();
          active = k;
          v = e.vectors.block(0, 0, e.vectors.rows(), 1);
        }
      }
      out.best_phi = std::min(out.best_phi, phi);
      if (phi <= -mu) {
        double checked = 0.0;
        auto cert = try_certificate(prob, x, mu, tol, checked);
        if (cert) {
          out.status = SynthesisStatus::kFeasible;
          out.certificate = std::move(cert);
          out.message = "margin target reached";
          return out;
        }
      }
      // Subgradient of −λmin(B_k) is −vᵀ D_i v for the extremal eigenvector.
      std::vector<double> g(m);
      double gg = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const Matrix& d = prob.coef(i, active);
        const Matrix dv = d * v;
        g[i] = -simd::dot(v.data(), dv.data());
        gg += g[i] * g[i];
      }
      if (!(gg > 0.0) || !std::isfinite(phi)) break;
      const double step = (phi - phi_target) / gg;
      for (std::size_t i = 0; i < m; ++i) x[i] -= step * g[i];
    }
  }
  out.status = SynthesisStatus::kNotFound;
  out.message = "iteration budget exhausted";
  return out;
}

}  // namespace

SynthesisOutcome solve_feasibility(const AugmentedSystem& aug, double gamma, double lambda0,
                                   const SolverOptions& opts, const Tolerances& tol) {
  if (!(gamma > 0.0)) throw std::invalid_argument("solve_feasibility: gamma must be positive");
  if (!(lambda0 >= 0.0)) throw std::invalid_argument("solve_feasibility: lambda0 must be nonnegative");
  if (!(opts.margin_target > 0.0)) throw std::invalid_argument("solve_feasibility: margin target must be positive");
  if (opts.fixed_eps && !(*opts.fixed_eps > 0.0)) {
    throw std::invalid_argument("solve_feasibility: fixed epsilon must be positive");
  }
  const LmiProblem prob(aug, gamma, lambda0, opts.fixed_eps);
  SynthesisOutcome out;
  try {
    out = opts.method == SolverMethod::kBarrier ? run_barrier(prob, opts, tol)
                                                : run_subgradient(prob, opts, tol);
  } catch (const NumericalError& e) {
    out.status = SynthesisStatus::kNumericalBreakdown;
    out.message = e.what();
  }
  out.detectable = pbh_detectable(aug.leader.A_hat, aug.C_tilde, tol);
  if (!out.feasible() && !out.detectable) {
    out.message += "; (C_tilde, A_hat) is not detectable, so no gain can exist";
  }
  return out;
}

CertificationReport certify(const SynthesisCertificate& cert, const AugmentedSystem& aug,
                            const StochasticDecomposition& dec, double gamma, double margin,
                            const Tolerances& tol) {
  CertificationReport rep;
  rep.margins = lmi_margins(cert.variables, gamma, cert.lambda0, aug, tol);
  rep.margins_ok = rep.margins.all_at_least(margin);
  const FollowerSpectrum spec = follower_spectrum(dec, tol);
  rep.decoupled = verify_theorem1(aug, cert.gain, spec, gamma, tol);
  rep.coupled = verify_definition1(aug, cert.gain, dec, gamma, tol);
  rep.pass = rep.margins_ok && rep.decoupled.pass && rep.coupled.pass;
  return rep;
}

GammaSearch minimize_gamma(const AugmentedSystem& aug, double lambda0, double gamma_hi,
                           double rel_tol, const SolverOptions& opts, const Tolerances& tol) {
  if (!(gamma_hi > 0.0)) throw std::invalid_argument("minimize_gamma: starting gamma must be positive");
  GammaSearch gs;
  double hi = gamma_hi;
  for (int k = 0;; ++k) {
    auto o = solve_feasibility(aug, hi, lambda0, opts, tol);
    gs.log.push_back({hi, o.feasible()});
    if (o.feasible()) {
      gs.best = std::move(o.certificate);
      break;
    }
    if (k >= 30) return gs;  // nothing feasible up to gamma_hi·2^30
    gs.lower = hi;
    hi *= 2.0;
  }
  gs.upper = hi;
  while (gs.upper - gs.lower > rel_tol * gs.upper) {
    const double mid = gs.lower == 0.0 && gs.upper > 0.0 && gs.log.size() == 1
                           ? 0.5 * gs.upper
                           : 0.5 * (gs.lower + gs.upper);
    auto o = solve_feasibility(aug, mid, lambda0, opts, tol);
    gs.log.push_back({mid, o.feasible()});
    if (o.feasible()) {
      gs.upper = mid;
      gs.best = std::move(o.certificate);
    } else {
      gs.lower = mid;
    }
  }
  return gs;
}

}  // namespace hinftrack
