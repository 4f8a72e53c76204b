#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include <cslprobe/dynamics.hpp>

#include "support/lyapunov_oracle.hpp"

using namespace cslprobe;
using cslprobe::testing::integrate_to_steady_state;
using cslprobe::testing::relative_frobenius;

namespace {

using M2 = SquareMatrix<Real, 2>;
using M6 = SquareMatrix<Real, 6>;

LinearModel<Real> baseline_model(bool csl_on, double omega1 = 1e4, SystemConfig cfg = {}) {
  const auto dq = derive(cfg, omega1);
  return build_model<Real>(dq, budgets(dq), csl_on);
}

} // namespace

TEST(Lyapunov, ScalarMultipleOfIdentity) {
  const M2 A = -M2::Identity();
  const M2 D = 2 * M2::Identity();
  const auto sol = solve_lyapunov_unchecked<Real, 2>(A, D);
  EXPECT_LT((sol.V - M2::Identity()).norm(), 1e-15);
  EXPECT_LT(sol.residual, 1e-15);
}

TEST(Lyapunov, JordanBlock) {
  M2 A;
  A << -1, 1, 0, -1;
  const auto sol = solve_lyapunov_unchecked<Real, 2>(A, M2::Identity());
  M2 want;
  want << 0.75, 0.25, 0.25, 0.5;
  EXPECT_LT((sol.V - want).norm(), 1e-15);
}

TEST(Lyapunov, DecoupledMechanicsGivesEquipartition) {
  SystemConfig cfg;
  cfg.coupling_G2_over_keff = 0.0;
  const auto dq = derive(cfg, 1e4);
  const auto noise = budgets(dq);
  const auto model = build_model<Real>(dq, noise, true);
  const auto sol = solve_lyapunov(model);
  for (int j = 0; j < 2; ++j) {
    const long double want = static_cast<long double>(noise[j].total_with_csl) / (2.0L * dq.gamma);
    EXPECT_NEAR(static_cast<double>(sol.V(2 * j, 2 * j) / want), 1.0, 1e-12);
    EXPECT_NEAR(static_cast<double>(sol.V(2 * j + 1, 2 * j + 1) / want), 1.0, 1e-12);
  }
  EXPECT_NEAR(static_cast<double>(sol.V(quad::X, quad::X)), 0.5, 1e-14);
  EXPECT_NEAR(static_cast<double>(sol.V(quad::Y, quad::Y)), 0.5, 1e-14);
}

TEST(Lyapunov, BaselineMatchesTimeIntegration) {
  for (bool csl : {false, true}) {
    const auto model = baseline_model(csl);
    const auto sol = solve_lyapunov(model);
    const auto ref = integrate_to_steady_state<Real, 6>(model.drift, model.diffusion);
    EXPECT_LT((relative_frobenius<Real, 6>(sol.V, ref.V)), 1e-6L);
    EXPECT_LE(sol.residual, lyapunov_residual_bound);
  }
}

TEST(Lyapunov, RandomStableModelsMatchTimeIntegration) {
  std::mt19937_64 rng(20240917);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> margin(0.05, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    M6 M, B;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        M(i, j) = normal(rng);
        B(i, j) = normal(rng);
      }
    const Real shift = M.operatorNorm() + margin(rng);
    const M6 A = M - shift * M6::Identity();
    const M6 D = B * B.transpose() + Real(0.1) * M6::Identity();
    const auto sol = solve_lyapunov_unchecked<Real, 6>(A, D);
    const auto ref = integrate_to_steady_state<Real, 6>(A, D);
    EXPECT_LT((relative_frobenius<Real, 6>(sol.V, ref.V)), 1e-6L) << "trial " << trial;
    EXPECT_LT(sol.residual, 1e-14L) << "trial " << trial;
  }
}

TEST(Lyapunov, PermutationCovariance) {
  const auto model = baseline_model(true);
  const auto sol = solve_lyapunov(model);

  std::array<int, 6> perm{4, 2, 5, 0, 3, 1};
  Eigen::PermutationMatrix<6> P;
  for (int i = 0; i < 6; ++i)
    P.indices()[i] = perm[i];
  const M6 Ap = P * model.drift * P.transpose();
  const M6 Dp = P * model.diffusion * P.transpose();
  const auto permuted = solve_lyapunov_unchecked<Real, 6>(Ap, Dp);
  const M6 back = P.transpose() * permuted.V * P;
  EXPECT_LT((relative_frobenius<Real, 6>(back, sol.V)), 1e-10L);
}

TEST(Lyapunov, SolutionIsSymmetricAndPhysical) {
  for (double w : {3e3, 1e4, 5e4}) {
    for (bool csl : {false, true}) {
      const auto model = baseline_model(csl, w);
      const auto sol = solve_lyapunov(model);
      EXPECT_EQ((sol.V - sol.V.transpose()).norm(), 0.0L);
      EXPECT_TRUE((is_physical<Real, 6>(sol.V))) << w;
      EXPECT_LE(sol.residual, lyapunov_residual_bound) << w;
    }
  }
}

TEST(Lyapunov, RefusesUnstableModel) {
  SystemConfig cfg;
  cfg.coupling_ratio_G1_over_G2 = 1.1;
  EXPECT_THROW(solve_lyapunov(baseline_model(false, 1e4, cfg)), InstabilityError);
}

TEST(Physicality, DetectsUncertaintyViolation) {
  SquareMatrix<Real, 2> V = SquareMatrix<Real, 2>::Identity() * Real(0.4);
  EXPECT_FALSE((is_physical<Real, 2>(V)));
  V = SquareMatrix<Real, 2>::Identity() * Real(0.5);
  EXPECT_TRUE((is_physical<Real, 2>(V)));
  V << 2.0, 0.0, 0.0, 0.125;
  EXPECT_TRUE((is_physical<Real, 2>(V)));
  V << 2.0, 0.0, 0.0, 0.12;
  EXPECT_FALSE((is_physical<Real, 2>(V)));
}

TEST(Stability, BaselineStable) {
  const auto st = is_stable(baseline_model(true));
  EXPECT_TRUE(st.stable);
  EXPECT_LT(st.abscissa, 0.0L);
  EXPECT_TRUE(std::is_sorted(st.eigenvalues.begin(), st.eigenvalues.end(),
                             [](auto a, auto b) { return a.real() > b.real(); }));
}

TEST(Stability, EqualCouplingsWithoutDampingAreMarginal) {
  SystemConfig cfg;
  cfg.coupling_ratio_G1_over_G2 = 1.0;
  cfg.gas_pressure = 0.0;
  const auto st = is_stable(baseline_model(false, 1e4, cfg));
  EXPECT_FALSE(st.stable);
  EXPECT_GE(st.abscissa, -st.margin);
}

TEST(Stability, StrongerFirstCouplingUnstable) {
  for (double r : {1.05, 1.3, 2.0}) {
    SystemConfig cfg;
    cfg.coupling_ratio_G1_over_G2 = r;
    EXPECT_FALSE(is_stable(baseline_model(false, 1e4, cfg)).stable) << r;
  }
}

TEST(Stability, RatioBelowOneStableOverTypicalSettings) {
  for (double r : {0.1, 0.5, 0.72, 0.9, 0.99})
    for (double g : {0.3, 1.2, 3.0}) {
      SystemConfig cfg;
      cfg.coupling_ratio_G1_over_G2 = r;
      cfg.coupling_G2_over_keff = g;
      EXPECT_TRUE(is_stable(baseline_model(true, 1e4, cfg)).stable) << r << " " << g;
    }
}

TEST(Model, LayoutOfDriftAndDiffusion) {
  using namespace quad;
  const auto dq = derive(SystemConfig{}, 1e4);
  const auto noise = budgets(dq);
  const auto m = build_model<Real>(dq, noise, false);
  const Real G1 = dq.G[0], G2 = dq.G[1], k = dq.kappa_eff, hg = Real(dq.gamma) / 2;
  M6 A = M6::Zero();
  A(x1, x1) = A(p1, p1) = A(x2, x2) = A(p2, p2) = -hg;
  A(X, X) = A(Y, Y) = -k;
  A(x1, Y) = -G1;
  A(p1, X) = -G1;
  A(x2, Y) = G2;
  A(p2, X) = -G2;
  A(X, p1) = -G1;
  A(X, p2) = G2;
  A(Y, x1) = -G1;
  A(Y, x2) = -G2;
  EXPECT_EQ(m.drift, A);

  M6 D = M6::Zero();
  D.diagonal() << Real(noise[0].total_without_csl) / 2, Real(noise[0].total_without_csl) / 2,
      Real(noise[1].total_without_csl) / 2, Real(noise[1].total_without_csl) / 2, k, k;
  EXPECT_EQ(m.diffusion, D);
}

TEST(Model, CollapseToggleOnlyChangesMechanicalDiffusion) {
  const auto dq = derive(SystemConfig{}, 1e4);
  const auto noise = budgets(dq);
  const auto off = build_model<Real>(dq, noise, false);
  const auto on = build_model<Real>(dq, noise, true);
  EXPECT_EQ(off.drift, on.drift);
  const M6 delta = on.diffusion - off.diffusion;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      if (i == j && i < 4)
        EXPECT_NEAR(static_cast<double>(delta(i, j)), noise[i / 2].lambda_sph / 2, 1e-12 * noise[i / 2].lambda_sph);
      else
        EXPECT_EQ(delta(i, j), 0.0L) << i << "," << j;
    }
}

TEST(Model, DetuningEntersCavityBlock) {
  SystemConfig cfg;
  cfg.detuning = 37.0;
  const auto m = baseline_model(false, 1e4, cfg);
  EXPECT_EQ(m.drift(quad::X, quad::Y), 37.0L);
  EXPECT_EQ(m.drift(quad::Y, quad::X), -37.0L);
}
