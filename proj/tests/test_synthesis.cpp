#include <gtest/gtest.h>

#include <random>

#include "hinftrack/error.hpp"
#include "hinftrack/linalg.hpp"
#include "hinftrack/synthesis.hpp"
#include "support.hpp"

using namespace hinftrack;
using testsupport::random_matrix;

namespace {

LmiVariables random_vars(std::mt19937_64& rng, const AugmentedSystem& aug) {
  LmiVariables v;
  const Matrix g = random_matrix(rng, aug.dim(), aug.dim());
  v.P = g + g.transpose();
  v.V = random_matrix(rng, aug.dim(), aug.my());
  v.eps = std::uniform_real_distribution<double>(-1, 1)(rng);
  return v;
}

LmiVariables combine(double a, const LmiVariables& x, double b, const LmiVariables& y) {
  return {a * x.P + b * y.P, a * x.V + b * y.V, a * x.eps + b * y.eps};
}

}  // namespace

TEST(Lmi, BlocksAreSymmetricWithExpectedLayout) {
  const auto ex = testsupport::worked_example();
  std::mt19937_64 rng(30);
  const auto v = random_vars(rng, ex.aug);
  const Matrix m12 = assemble_lmi12(v, 1.0, ex.spec.lambda0, ex.aug);
  const Matrix m13 = assemble_lmi13(v, 1.0, ex.aug);
  ASSERT_EQ(m12.rows(), 3u + 3u + 1u + 1u);
  ASSERT_EQ(m13.rows(), 3u + 3u);
  EXPECT_EQ((m12 - m12.transpose()).max_abs(), 0.0);
  EXPECT_EQ((m13 - m13.transpose()).max_abs(), 0.0);
  // Top-right block is V, bottom-right is −εI.
  EXPECT_EQ(m12(0, 7), v.V(0, 0));
  EXPECT_EQ(m12(7, 7), -v.eps);
  EXPECT_EQ(m12(6, 6), -1.0);
  EXPECT_EQ(m13.block(0, 0, 3, 3), Matrix::identity(3));
  EXPECT_EQ(m13.block(0, 3, 3, 3), ex.aug.C_perf);
}

TEST(Lmi, AssemblyIsAffineInTheVariables) {
  const auto ex = testsupport::worked_example();
  std::mt19937_64 rng(31);
  for (int t = 0; t < 20; ++t) {
    const auto x = random_vars(rng, ex.aug), y = random_vars(rng, ex.aug);
    const double a = std::uniform_real_distribution<double>(-2, 2)(rng);
    const auto l = [&](const LmiVariables& v) { return assemble_lmi12(v, 0.8, ex.spec.lambda0, ex.aug); };
    const auto r = [&](const LmiVariables& v) { return assemble_lmi13(v, 0.8, ex.aug); };
    const auto z = combine(a, x, 1 - a, y);
    EXPECT_LT((l(z) - (a * l(x) + (1 - a) * l(y))).max_abs(), 1e-12);
    EXPECT_LT((r(z) - (a * r(x) + (1 - a) * r(y))).max_abs(), 1e-12);
  }
}

TEST(Lmi, ShapeErrors) {
  const auto ex = testsupport::worked_example();
  LmiVariables v{Matrix::identity(2), Matrix(3, 1), 1.0};
  EXPECT_THROW(assemble_lmi12(v, 1.0, 0.5, ex.aug), DimensionError);
  v.P = Matrix::identity(3);
  v.V = Matrix(3, 2);
  EXPECT_THROW(assemble_lmi12(v, 1.0, 0.5, ex.aug), DimensionError);
}

TEST(Synthesis, WorkedExampleProducesVerifiedCertificate) {
  const auto ex = testsupport::worked_example();
  SolverOptions opts;
  opts.fixed_eps = 0.25;
  const auto out = solve_feasibility(ex.aug, 1.0, ex.spec.lambda0, opts);
  ASSERT_TRUE(out.feasible()) << out.message;
  ASSERT_TRUE(out.certificate.has_value());
  const auto& cert = *out.certificate;
  EXPECT_EQ(cert.variables.eps, 0.25);
  EXPECT_TRUE(cert.margins.all_at_least(opts.margin_target));
  EXPECT_TRUE(out.detectable);
  // F = P⁻¹V by an independent solve.
  const Eigen::MatrixXd F = testsupport::to_eigen(cert.variables.P).ldlt().solve(testsupport::to_eigen(cert.variables.V));
  EXPECT_LT((testsupport::to_eigen(cert.gain.matrix()) - F).cwiseAbs().maxCoeff(), 1e-9);
  const auto rep = certify(cert, ex.aug, ex.dec, 1.0, 5e-7);
  EXPECT_TRUE(rep.pass);
  EXPECT_TRUE(rep.decoupled.pass);
  EXPECT_TRUE(rep.coupled.pass);
}

TEST(Synthesis, FreeEpsilonAlsoSucceeds) {
  const auto ex = testsupport::worked_example();
  const auto out = solve_feasibility(ex.aug, 1.0, ex.spec.lambda0, {});
  ASSERT_TRUE(out.feasible()) << out.message;
  EXPECT_GT(out.certificate->variables.eps, 0.0);
  EXPECT_TRUE(certify(*out.certificate, ex.aug, ex.dec, 1.0).pass);
}

TEST(Synthesis, CertificateRemainsValidForLargerGamma) {
  const auto ex = testsupport::worked_example();
  SolverOptions opts;
  opts.fixed_eps = 0.25;
  const auto out = solve_feasibility(ex.aug, 1.0, ex.spec.lambda0, opts);
  ASSERT_TRUE(out.feasible());
  double prev = -1.0;
  for (double g : {1.0, 1.5, 3.0, 10.0}) {
    const auto m = lmi_margins(out.certificate->variables, g, ex.spec.lambda0, ex.aug);
    EXPECT_GT(m.min(), 0.0) << g;
    EXPECT_GE(m.lmi13, prev);
    prev = m.lmi13;
  }
}

TEST(Synthesis, TinyGammaIsNotFound) {
  const auto ex = testsupport::worked_example();
  SolverOptions opts;
  opts.fixed_eps = 0.25;
  const auto out = solve_feasibility(ex.aug, 1e-9, ex.spec.lambda0, opts);
  EXPECT_FALSE(out.feasible());
  EXPECT_EQ(out.status, SynthesisStatus::kNotFound);
  EXPECT_FALSE(out.certificate.has_value());
  EXPECT_GT(out.best_phi, 0.0);
}

TEST(Synthesis, UndetectablePairIsFlagged) {
  // The unit modes of the leader are invisible when E = 0.
  const auto ex = testsupport::worked_example();
  const auto aug = build_augmented(ex.aug.leader, ex.aug.follower, {Matrix{{0.0}}}, ex.aug.C_perf);
  SolverOptions opts;
  opts.fixed_eps = 0.25;
  opts.max_iterations = 400;
  const auto out = solve_feasibility(aug, 1.0, ex.spec.lambda0, opts);
  EXPECT_FALSE(out.feasible());
  EXPECT_FALSE(out.detectable);
}

TEST(Synthesis, SubgradientSolverOnAnEasyInstance) {
  // Stable leader, generous γ: the identity start is nearly feasible.
  LeaderModel leader{2, 1, Matrix{{0.5, 0.0}, {0.2, 0.6}}};
  const auto aug = build_augmented(leader, {Matrix{{0.3}}, Matrix{{0.2}}}, {Matrix{{1.0}}}, 0.1 * Matrix::identity(2));
  SolverOptions opts;
  opts.method = SolverMethod::kSubgradient;
  opts.max_iterations = 20000;
  const auto out = solve_feasibility(aug, 2.0, 0.5, opts);
  ASSERT_TRUE(out.feasible()) << out.message;
  EXPECT_TRUE(out.certificate->margins.all_at_least(opts.margin_target));
  const SolverOptions barrier;
  EXPECT_TRUE(solve_feasibility(aug, 2.0, 0.5, barrier).feasible());
}

TEST(Synthesis, ComputeGainRejectsIndefiniteP) {
  const auto ex = testsupport::worked_example();
  const LmiVariables v{Matrix{{1, 0, 0}, {0, -1, 0}, {0, 0, 1}}, Matrix(3, 1), 1.0};
  EXPECT_THROW(compute_gain(v, ex.aug), ModelError);
}

TEST(Synthesis, InvalidArguments) {
  const auto ex = testsupport::worked_example();
  EXPECT_THROW(solve_feasibility(ex.aug, 0.0, 0.5), std::invalid_argument);
  SolverOptions opts;
  opts.fixed_eps = -1.0;
  EXPECT_THROW(solve_feasibility(ex.aug, 1.0, 0.5, opts), std::invalid_argument);
}

TEST(GammaSearch, BracketIsMonotoneAndEndpointsCheckOut) {
  const auto ex = testsupport::worked_example();
  SolverOptions opts;
  opts.fixed_eps = 0.25;
  const auto gs = minimize_gamma(ex.aug, ex.spec.lambda0, 1.0, 1e-3, opts);
  ASSERT_TRUE(gs.best.has_value());
  EXPECT_LE(gs.upper - gs.lower, 1e-3 * gs.upper);
  EXPECT_LT(gs.lower, gs.upper);
  // Every feasible γ in the log is at least every infeasible one.
  double max_bad = 0.0, min_good = 1e300;
  for (const auto& s : gs.log) {
    if (s.feasible) {
      min_good = std::min(min_good, s.gamma);
    } else {
      max_bad = std::max(max_bad, s.gamma);
    }
  }
  EXPECT_LE(max_bad, min_good);
  EXPECT_EQ(min_good, gs.upper);
  // Spot checks at the endpoints.
  EXPECT_TRUE(solve_feasibility(ex.aug, gs.upper, ex.spec.lambda0, opts).feasible());
  if (gs.lower > 0.0) EXPECT_FALSE(solve_feasibility(ex.aug, gs.lower, ex.spec.lambda0, opts).feasible());
  EXPECT_TRUE(certify(*gs.best, ex.aug, ex.dec, gs.upper, 1e-7).pass);
}
