#include "hinftrack/plant.hpp"

#include <string>

namespace hinftrack {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_shape(const Matrix& m, std::size_t r, std::size_t c, const std::string& field) {
  if (m.rows() != r || m.cols() != c) {
    throw DimensionError(field + " is " + shape(m) + ", expected " + std::to_string(r) + "x" +
                         std::to_string(c));
  }
}

}  // namespace

Matrix LeaderModel::block(std::size_t s, std::size_t j) const {
  return A_hat.block(s * block_size, j * block_size, block_size, block_size);
}

Matrix LeaderModel::C_hat() const {
  Matrix c(block_size, dim());
  c.set_block(0, dim() - block_size, Matrix::identity(block_size));
  return c;
}

AugmentedSystem build_augmented(const LeaderModel& leader, const FollowerModel& follower,
                                const SensingModel& sensing, const Matrix& C_perf) {
  if (leader.blocks == 0 || leader.block_size == 0) {
    throw DimensionError("leader: block count and block size must be positive");
  }
  const std::size_t m0 = leader.block_size;
  const std::size_t dim = leader.dim();
  require_shape(leader.A_hat, dim, dim, "leader.A_hat");
  require_shape(follower.A, m0, m0, "follower.A");
  if (follower.B_w.rows() != m0 || follower.B_w.cols() == 0) {
    throw DimensionError("follower.B_w is " + shape(follower.B_w) + ", expected " +
                         std::to_string(m0) + " rows and at least one column");
  }
  if (sensing.E.cols() != m0 || sensing.E.rows() == 0) {
    throw DimensionError("sensing.E is " + shape(sensing.E) + ", expected " + std::to_string(m0) +
                         " columns and at least one row");
  }
  if (sensing.E.rows() > m0) {
    throw DimensionError("sensing.E has " + std::to_string(sensing.E.rows()) +
                         " rows; at most m0 = " + std::to_string(m0) + " allowed");
  }
  if (C_perf.cols() != dim || C_perf.rows() == 0) {
    throw DimensionError("performance.C is " + shape(C_perf) + ", expected " +
                         std::to_string(dim) + " columns");
  }
  for (const Matrix* m : {&leader.A_hat, &follower.A, &follower.B_w, &sensing.E, &C_perf}) {
    if (!m->all_finite()) throw DimensionError("model matrices must be finite");
  }

  AugmentedSystem aug;
  aug.leader = leader;
  aug.follower = follower;
  aug.sensing = sensing;
  aug.C_perf = C_perf;
  aug.C_tilde = Matrix(sensing.E.rows(), dim);
  aug.C_tilde.set_block(0, dim - m0, sensing.E);
  aug.B_hat_w = Matrix(dim, follower.B_w.cols());
  aug.B_hat_w.set_block(dim - m0, 0, follower.B_w);
  aug.A_check = leader.block(leader.blocks - 1, leader.blocks - 1) - follower.A;
  return aug;
}

ProtocolGain::ProtocolGain(const AugmentedSystem& aug, Matrix F)
    : F_(std::move(F)), blocks_(aug.leader.blocks), block_size_(aug.m0()) {
  require_shape(F_, aug.dim(), aug.my(), "gain F");
}

Matrix ProtocolGain::block(std::size_t s) const {
  return F_.block(s * block_size_, 0, block_size_, F_.cols());
}

ProtocolOutput protocol_step(const AugmentedSystem& aug, const ProtocolGain& gain, const Matrix& x,
                             const Matrix& z, const Matrix& eps) {
  const std::size_t n = aug.leader.blocks;
  const std::size_t m0 = aug.m0();
  require_shape(x, m0, 1, "follower state x");
  require_shape(z, (n - 1) * m0, 1, "estimator state z");
  require_shape(eps, aug.my(), 1, "relative information");
  require_shape(gain.matrix(), aug.dim(), aug.my(), "gain F");

  const LeaderModel& L = aug.leader;
  auto z_block = [&](std::size_t j) { return z.block(j * m0, 0, m0, 1); };

  ProtocolOutput out;
  out.u = aug.A_check * x - gain.block(n - 1) * eps;
  for (std::size_t j = 0; j + 1 < n; ++j) out.u += L.block(n - 1, j) * z_block(j);

  out.z_next = Matrix((n - 1) * m0, 1);
  for (std::size_t s = 0; s + 1 < n; ++s) {
    Matrix zs = L.block(s, n - 1) * x - gain.block(s) * eps;
    for (std::size_t j = 0; j + 1 < n; ++j) zs += L.block(s, j) * z_block(j);
    out.z_next.set_block(s * m0, 0, zs);
  }
  return out;
}

std::vector<Matrix> relative_information(const Adjacency& adj, const StochasticDecomposition& dec,
                                         const SensingModel& sensing, const std::vector<Matrix>& x,
                                         const Matrix& theta_n) {
  const Matrix& a = adj.weights;
  const std::size_t f = adj.followers();
  if (x.size() != f) {
    throw DimensionError("relative_information: expected " + std::to_string(f) +
                         " follower states, got " + std::to_string(x.size()));
  }
  const std::size_t m0 = sensing.E.cols();
  require_shape(theta_n, m0, 1, "leader block theta_n");
  for (const auto& xi : x) require_shape(xi, m0, 1, "follower state");

  std::vector<Matrix> eps;
  eps.reserve(f);
  for (std::size_t i = 0; i < f; ++i) {
    // Weighted disagreement in state space, mapped through E once.
    Matrix acc(m0, 1);
    for (std::size_t j = 0; j < f; ++j) {
      const double w = a(i + 1, j + 1);
      if (w != 0.0) acc += w * (x[i] - x[j]);
    }
    const double c = a(i + 1, 0);
    if (c != 0.0) acc += c * (x[i] - theta_n);
    eps.push_back((1.0 / dec.kappa) * (sensing.E * acc));
  }
  return eps;
}

std::vector<StateSpace> decoupled_systems(const AugmentedSystem& aug, const ProtocolGain& gain,
                                          const FollowerSpectrum& spec) {
  const Matrix FC = gain.matrix() * aug.C_tilde;
  std::vector<StateSpace> out;
  out.reserve(spec.lambda.size());
  for (double lambda : spec.lambda) {
    out.push_back({aug.leader.A_hat - (1.0 - lambda) * FC, aug.B_hat_w, aug.C_perf, true});
  }
  return out;
}

StateSpace coupled_error_system(const AugmentedSystem& aug, const ProtocolGain& gain,
                                const StochasticDecomposition& dec) {
  const std::size_t f = dec.D_follower.rows();
  const Matrix I = Matrix::identity(f);
  const Matrix FC = gain.matrix() * aug.C_tilde;
  StateSpace ss;
  ss.A = kron(I, aug.leader.A_hat) - kron(I - dec.D_follower, FC);
  ss.B = kron(I, aug.B_hat_w);
  ss.C = kron(I, aug.C_perf);
  ss.output_advanced = true;
  return ss;
}

}  // namespace hinftrack
