#include <cmath>

#include <gtest/gtest.h>
#include <quadmath.h>

#include <cslprobe/noise.hpp>

using namespace cslprobe;

namespace {

// Mode rates at omega1 = 1e4 s^-1 for the default configuration, from the
// mpmath oracle in tests/oracles.
struct Expected {
  double D_t, D_c, D_a, lambda_sph;
};
constexpr Expected ref_mode1{17.763252454464613, 1.7596764741644069, 1.1541075223832164, 93.56169577272073};
constexpr Expected ref_mode2{35.526504908929226, 0.87983823708220343, 0.57705376119160819, 46.780847886360365};

void expect_rel(double actual, double expected, double tol) {
  EXPECT_LE(std::abs(actual - expected), tol * std::abs(expected)) << actual << " vs " << expected;
}

double bracket_quad(double x) {
  const __float128 q = x;
  const __float128 e = expq(-q);
  return static_cast<double>(e - 1 + q / 2 * (e + 1));
}

} // namespace

TEST(Noise, BaselineRatesMatchReference) {
  const auto b = budgets(derive(SystemConfig{}, 1e4));
  for (const auto& [got, want] : {std::pair{b[0], ref_mode1}, std::pair{b[1], ref_mode2}}) {
    expect_rel(got.D_t, want.D_t, 1e-12);
    expect_rel(got.D_c, want.D_c, 1e-12);
    expect_rel(got.D_a, want.D_a, 1e-12);
    expect_rel(got.lambda_sph, want.lambda_sph, 1e-12);
  }
}

TEST(Noise, TotalsDifferByCollapseTerm) {
  const auto b = budgets(derive(SystemConfig{}, 2.3e4));
  for (const auto& m : b) {
    EXPECT_DOUBLE_EQ(m.total_without_csl, m.D_a + m.D_t + m.D_c);
    EXPECT_DOUBLE_EQ(m.total_with_csl - m.total_without_csl, m.lambda_sph);
    EXPECT_EQ(m.total(false), m.total_without_csl);
    EXPECT_EQ(m.total(true), m.total_with_csl);
  }
}

TEST(Noise, ZeroCases) {
  SystemConfig cfg;
  cfg.gas_pressure = 0.0;
  EXPECT_EQ(gas_diffusion(derive(cfg, 1e4), Mode::first), 0.0);

  cfg = {};
  cfg.csl_rate = 0.0;
  EXPECT_EQ(csl_diffusion(cfg, 1e4), 0.0);

  cfg = {};
  cfg.csl_enabled = false;
  const auto b = budget(derive(cfg, 1e4), Mode::first);
  EXPECT_EQ(b.lambda_sph, 0.0);
  EXPECT_EQ(b.total_with_csl, b.total_without_csl);
}

TEST(Noise, SecondModeScalesInverselyWithFrequencyRatio) {
  const auto b = budgets(derive(SystemConfig{}, 1e4));
  expect_rel(b[1].D_t / b[0].D_t, 2.0, 1e-14);
  expect_rel(b[1].D_c / b[0].D_c, 0.5, 1e-14);
  expect_rel(b[1].D_a / b[0].D_a, 0.5, 1e-14);
  expect_rel(b[1].lambda_sph / b[0].lambda_sph, 0.5, 1e-14);
}

TEST(Noise, FrequencyScaling) {
  const auto lo = budget(derive(SystemConfig{}, 1e4), Mode::first);
  const auto hi = budget(derive(SystemConfig{}, 3e4), Mode::first);
  expect_rel(hi.D_t / lo.D_t, 3.0, 1e-13);
  expect_rel(hi.D_c / lo.D_c, 1.0, 1e-13);
  expect_rel(hi.D_a / lo.D_a, 1.0 / 3.0, 1e-13);
  expect_rel(hi.lambda_sph / lo.lambda_sph, 1.0 / 3.0, 1e-13);
}

TEST(Noise, RadiusScaling) {
  SystemConfig big;
  big.sphere_radius = 30e-9;
  const auto lo = budget(derive(SystemConfig{}, 1e4), Mode::first);
  const auto hi = budget(derive(big, 1e4), Mode::first);
  expect_rel(hi.D_t / lo.D_t, 8.0, 1e-13);
  expect_rel(hi.D_c / lo.D_c, 1.0, 1e-12);
  expect_rel(hi.D_a / lo.D_a, 0.5, 1e-13);
}

TEST(Noise, CavityRateIndependentOfRadius) {
  const double ref = cavity_diffusion(derive(SystemConfig{}, 1e4), Mode::first);
  for (double R : {5e-9, 11e-9, 40e-9, 90e-9}) {
    SystemConfig cfg;
    cfg.sphere_radius = R;
    expect_rel(cavity_diffusion(derive(cfg, 1e4), Mode::first), ref, 1e-12);
  }
}

TEST(Noise, CollapseRateCubicInRadiusForSmallSpheres) {
  SystemConfig a, b;
  a.sphere_radius = 1e-10;
  b.sphere_radius = 2e-10;
  expect_rel(csl_diffusion(b, 1e4) / csl_diffusion(a, 1e4), 8.0, 1e-5);
}

TEST(Noise, CollapseRateLinearInRate) {
  SystemConfig a, b;
  b.csl_rate = 7.0 * a.csl_rate;
  expect_rel(csl_diffusion(b, 1e4), 7.0 * csl_diffusion(a, 1e4), 1e-14);
}

TEST(Noise, BracketPositive) {
  for (double x = 1e-10; x < 1e3; x *= 1.7)
    EXPECT_GT(csl_bracket(x), 0.0) << x;
}

// The quad-precision closed form resolves the bracket to 1e-6 once
// x^3/12 exceeds ~1e-28, i.e. R/r_c above ~3e-5.
TEST(Noise, BracketSeriesMatchesExtendedClosedForm) {
  for (double u = 3e-5; u < 1e-3; u *= 1.3) {
    const double x = u * u;
    expect_rel(csl_bracket(x), bracket_quad(x), 1e-6);
  }
}

TEST(Noise, BracketClosedFormBranch) {
  // Long double leaves ~eps*12/x^3 relative error just above the threshold.
  expect_rel(csl_bracket(csl_series_threshold), bracket_quad(csl_series_threshold), 1e-6);
  expect_rel(csl_bracket(1e-3), bracket_quad(1e-3), 1e-9);
  for (double x : {0.0225, 0.05})
    expect_rel(csl_bracket(x), bracket_quad(x), 1e-11);
  for (double x : {0.3, 1.0, 5.66, 20.0, 200.0})
    expect_rel(csl_bracket(x), bracket_quad(x), 1e-14);
}

TEST(Noise, BracketContinuousAtSeriesThreshold) {
  const double below = std::nextafter(csl_series_threshold, 0.0);
  expect_rel(csl_bracket(below), csl_bracket(csl_series_threshold), 1e-6);
}

TEST(Noise, CollapseRateRisesThenFalls) {
  auto rate = [](double u) {
    SystemConfig cfg;
    cfg.sphere_radius = u * cfg.csl_length;
    return csl_diffusion(cfg, 1e4);
  };
  double prev = rate(0.01);
  for (double u = 0.02; u <= 2.3; u += 0.01) {
    const double r = rate(u);
    EXPECT_GT(r, prev) << u;
    prev = r;
  }
  prev = rate(2.5);
  for (double u = 2.51; u <= 20.0; u += 0.05) {
    const double r = rate(u);
    EXPECT_LT(r, prev) << u;
    prev = r;
  }
}

TEST(Noise, CollapseRatePeakRadius) {
  const double rc = 100e-9;
  const double peak = csl_peak_radius(rc);
  EXPECT_NEAR(peak / rc, 2.38, 0.01 * 2.38);
  EXPECT_NEAR(csl_peak_radius(37e-9) / 37e-9, peak / rc, 1e-8);
}

TEST(Noise, RejectsNonPositiveInputs) {
  SystemConfig cfg;
  EXPECT_THROW(csl_diffusion(cfg, 0.0), ConfigError);
  cfg.csl_length = 0.0;
  EXPECT_THROW(csl_diffusion(cfg, 1e4), ConfigError);
}
