#include "hinftrack/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "hinftrack/error.hpp"
#include "hinftrack/simd.hpp"

namespace hinftrack {

Matrix disturbance(std::size_t i, long k, std::size_t mw, const DisturbanceSpec& spec) {
  if (i < 2) throw std::invalid_argument("disturbance: follower index must be at least 2");
  if (spec.window_end < 0) throw std::invalid_argument("disturbance: window end must be nonnegative");
  switch (spec.kind) {
    case DisturbanceKind::kNone:
      return Matrix(mw, 1);
    case DisturbanceKind::kPaperSine: {
      Matrix w(mw, 1);
      if (k >= 0 && k <= spec.window_end) {
        const double v = spec.amplitude * std::sin(static_cast<double>(i) * static_cast<double>(k - 1));
        for (std::size_t c = 0; c < mw; ++c) w(c, 0) = v;
      }
      return w;
    }
    case DisturbanceKind::kTable: {
      if (k < 0 || static_cast<std::size_t>(k) >= spec.table.size() ||
          i - 2 >= spec.table[static_cast<std::size_t>(k)].size()) {
        throw std::out_of_range("disturbance: table has no entry for node " + std::to_string(i) +
                                " at step " + std::to_string(k));
      }
      const Matrix& w = spec.table[static_cast<std::size_t>(k)][i - 2];
      if (w.rows() != mw || w.cols() != 1) {
        throw DimensionError("disturbance: table entry for node " + std::to_string(i) + " at step " +
                             std::to_string(k) + " must be " + std::to_string(mw) + " x 1");
      }
      return w;
    }
  }
  return Matrix(mw, 1);
}

namespace {

void require_vec(const Matrix& m, std::size_t rows, const std::string& what) {
  if (m.rows() != rows || m.cols() != 1) {
    throw DimensionError("simulate: " + what + " must be " + std::to_string(rows) + " x 1, got " +
                         std::to_string(m.rows()) + " x " + std::to_string(m.cols()));
  }
}

Matrix stack_zeta(const Matrix& z, const Matrix& x) { return vstack({&z, &x}); }

}  // namespace

Trajectories simulate(const Adjacency& adj, const StochasticDecomposition& dec,
                      const AugmentedSystem& aug, const ProtocolGain& gain, const SimConfig& config) {
  if (config.horizon < 1) throw std::invalid_argument("simulate: horizon must be at least 1");
  const std::size_t f = adj.followers();
  const std::size_t n = aug.leader.blocks;
  const std::size_t m0 = aug.m0();
  const std::size_t d = aug.dim();
  const std::size_t mw = aug.mw();
  if (dec.D_follower.rows() != f) throw DimensionError("simulate: topology and decomposition disagree");
  if (gain.matrix().rows() != d || gain.matrix().cols() != aug.my()) {
    throw DimensionError("simulate: gain does not match the augmented system");
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  auto random_vec = [&](std::size_t rows) {
    Matrix v(rows, 1);
    for (std::size_t r = 0; r < rows; ++r) v(r, 0) = uni(rng);
    return v;
  };

  Matrix theta = config.theta0 ? *config.theta0 : random_vec(d);
  require_vec(theta, d, "leader initial state");
  std::vector<Matrix> x;
  if (config.x0) {
    x = *config.x0;
    if (x.size() != f) throw DimensionError("simulate: expected " + std::to_string(f) + " follower initial states");
    for (const auto& xi : x) require_vec(xi, m0, "follower initial state");
  } else {
    for (std::size_t i = 0; i < f; ++i) x.push_back(random_vec(m0));
  }
  std::vector<Matrix> z;
  if (config.z0) {
    z = *config.z0;
    if (z.size() != f) throw DimensionError("simulate: expected " + std::to_string(f) + " estimator initial states");
    for (const auto& zi : z) require_vec(zi, (n - 1) * m0, "estimator initial state");
  } else {
    z.assign(f, Matrix((n - 1) * m0, 1));
  }

  const std::size_t steps = static_cast<std::size_t>(config.horizon) + 1;
  Trajectories tr;
  tr.theta.reserve(steps);
  tr.zeta.reserve(steps);
  tr.rho.reserve(steps);
  tr.eps.reserve(steps);
  tr.u.reserve(steps);
  tr.omega.reserve(steps);
  tr.e.reserve(steps);

  for (std::size_t k = 0; k < steps; ++k) {
    std::vector<Matrix> zeta(f), rho(f);
    Matrix e(f * aug.C_perf.rows(), 1);
    for (std::size_t i = 0; i < f; ++i) {
      zeta[i] = stack_zeta(z[i], x[i]);
      rho[i] = zeta[i] - theta;
      if (!zeta[i].all_finite()) {
        throw NumericalError("simulate: non-finite state of node " + std::to_string(i + 2) + " at step " +
                             std::to_string(k));
      }
      e.set_block(i * aug.C_perf.rows(), 0, aug.C_perf * rho[i]);
    }
    if (!theta.all_finite()) throw NumericalError("simulate: non-finite leader state at step " + std::to_string(k));

    const Matrix theta_n = theta.block((n - 1) * m0, 0, m0, 1);
    std::vector<Matrix> eps = relative_information(adj, dec, aug.sensing, x, theta_n);
    std::vector<Matrix> u(f), w(f);
    std::vector<Matrix> x_next(f), z_next(f);
    for (std::size_t i = 0; i < f; ++i) {
      w[i] = disturbance(i + 2, static_cast<long>(k), mw, config.disturbance);
      ProtocolOutput po = protocol_step(aug, gain, x[i], z[i], eps[i]);
      u[i] = std::move(po.u);
      z_next[i] = std::move(po.z_next);
      x_next[i] = aug.follower.A * x[i] + u[i] + aug.follower.B_w * w[i];
    }

    tr.theta.push_back(theta);
    tr.zeta.push_back(std::move(zeta));
    tr.rho.push_back(std::move(rho));
    tr.eps.push_back(std::move(eps));
    tr.u.push_back(std::move(u));
    tr.omega.push_back(std::move(w));
    tr.e.push_back(std::move(e));

    theta = aug.leader.A_hat * theta;
    x = std::move(x_next);
    z = std::move(z_next);
  }
  return tr;
}

std::vector<double> tracking_error(const Trajectories& traj) {
  std::vector<double> E;
  E.reserve(traj.steps());
  for (const auto& rho : traj.rho) {
    double s = 0.0;
    for (const auto& r : rho) s += simd::dot(r.data(), r.data());
    E.push_back(s);
  }
  return E;
}

EnergyCurves energy_curves(const Trajectories& traj, double gamma) {
  EnergyCurves c;
  double se = 0.0, sw = 0.0;
  for (std::size_t k = 0; k < traj.steps(); ++k) {
    se += simd::dot(traj.e[k].data(), traj.e[k].data());
    for (const auto& w : traj.omega[k]) sw += simd::dot(w.data(), w.data());
    c.output.push_back(se);
    c.disturbance.push_back(gamma * gamma * sw);
  }
  return c;
}

std::optional<long> settling_step(const std::vector<double>& E, double threshold) {
  if (E.empty() || !(E.back() < threshold)) return std::nullopt;
  std::size_t k = E.size();
  while (k > 0 && E[k - 1] < threshold) --k;
  return static_cast<long>(k);
}

std::string trajectories_csv(const Trajectories& traj, double gamma) {
  std::string out;
  if (traj.steps() == 0) return out;
  const std::size_t d = traj.theta[0].rows();
  const std::size_t f = traj.zeta[0].size();
  const std::size_t ne = traj.e[0].rows();
  out += "k";
  for (std::size_t c = 0; c < d; ++c) out += ",theta_" + std::to_string(c + 1);
  for (std::size_t i = 0; i < f; ++i)
    for (std::size_t c = 0; c < d; ++c) out += ",zeta_" + std::to_string(i + 2) + "_" + std::to_string(c + 1);
  for (std::size_t c = 0; c < ne; ++c) out += ",e_" + std::to_string(c + 1);
  out += ",E,energy_e,energy_w\n";

  const auto E = tracking_error(traj);
  const auto en = energy_curves(traj, gamma);
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    out += buf;
  };
  for (std::size_t k = 0; k < traj.steps(); ++k) {
    out += std::to_string(k);
    for (std::size_t c = 0; c < d; ++c) put(traj.theta[k][c]);
    for (std::size_t i = 0; i < f; ++i)
      for (std::size_t c = 0; c < d; ++c) put(traj.zeta[k][i][c]);
    for (std::size_t c = 0; c < ne; ++c) put(traj.e[k][c]);
    put(E[k]);
    put(en.output[k]);
    put(en.disturbance[k]);
    out += '\n';
  }
  return out;
}

}  // namespace hinftrack

#include "hinftrack/linalg.hpp"

namespace hinftrack {

DecayPrediction predict_decay(const Matrix& A, double E0, double threshold, long max_steps,
                              const Tolerances& tol) {
  if (!(threshold > 0.0)) throw std::invalid_argument("predict_decay: threshold must be positive");
  DecayPrediction p;
  p.spectral_radius = spectral_radius(A, tol);
  if (E0 < threshold) {
    p.asymptotic = p.bound = 0;
    return p;
  }
  if (p.spectral_radius < 1.0 && p.spectral_radius > 0.0) {
    p.asymptotic = static_cast<long>(std::ceil(std::log(threshold / E0) / (2.0 * std::log(p.spectral_radius))));
  } else if (p.spectral_radius == 0.0) {
    p.asymptotic = 1;
  }
  Matrix power = Matrix::identity(A.rows());
  for (long k = 1; k <= max_steps; ++k) {
    power = A * power;
    const double s = sv_max(power, tol);
    if (s * s * E0 < threshold) {
      p.bound = k;
      break;
    }
  }
  return p;
}

}  // namespace hinftrack
