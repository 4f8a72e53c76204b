#ifndef CSLPROBE_NOISE_HPP
#define CSLPROBE_NOISE_HPP

#include <cmath>

#include "params.hpp"

namespace cslprobe {

/// Momentum-diffusion rates (s^-1) acting on one mechanical mode.
struct NoiseBudget {
  Mode mode = Mode::first;
  double D_a = 0;         // residual gas
  double D_t = 0;         // trap-light scattering
  double D_c = 0;         // cavity-photon scattering
  double lambda_sph = 0;  // collapse noise
  double total_without_csl = 0;
  double total_with_csl = 0;

  double total(bool csl_on) const noexcept { return csl_on ? total_with_csl : total_without_csl; }
};

namespace detail {

inline double mode_frequency(const DerivedQuantities& dq, Mode mode) {
  const double w = dq.omega[index(mode)];
  if (!(w > 0))
    throw ConfigError("trap frequency must be > 0");
  return w;
}

// 8 eps_c^2 k_c^6 R^3 / (9 rho0), shared by the two light-scattering rates.
inline double scattering_prefactor(const DerivedQuantities& dq) {
  const auto& cfg = dq.config;
  const double k3 = dq.k_c * dq.k_c * dq.k_c;
  const double R3 = cfg.sphere_radius * cfg.sphere_radius * cfg.sphere_radius;
  return 8.0 * dq.eps_c * dq.eps_c * k3 * k3 * R3 / (9.0 * cfg.sphere_density);
}

} // namespace detail

/// D_a = 2 gamma k_B T / (hbar omega), high-temperature limit.
inline double gas_diffusion(const DerivedQuantities& dq, Mode mode) {
  const double w = detail::mode_frequency(dq, mode);
  return 2.0 * dq.gamma * constants::k_B * dq.config.gas_temperature / (constants::hbar * w);
}

/// D_t = 8 eps_c^2 k_c^6 R^3 I / (9 rho0 omega omega_Lt).
inline double trap_diffusion(const DerivedQuantities& dq, Mode mode) {
  const double w = detail::mode_frequency(dq, mode);
  return detail::scattering_prefactor(dq) * dq.intensity[index(mode)] / (w * dq.omega_trap_laser);
}

/// D_c = 2 eps_c^2 k_c^6 R^3 hbar n_ph c / (9 rho0 omega Vc).
inline double cavity_diffusion(const DerivedQuantities& dq, Mode mode) {
  const double w = detail::mode_frequency(dq, mode);
  return 0.25 * detail::scattering_prefactor(dq) * constants::hbar * dq.n_ph * constants::c / (w * dq.mode_volume);
}

/// Below this value of x = R^2 / r_c^2 the bracket is summed as a series.
inline constexpr double csl_series_threshold = 1e-4;

/// e^{-x} - 1 + (x/2)(e^{-x} + 1), the geometry factor of the collapse
/// diffusion of a homogeneous sphere. Small x uses x^3/12 - x^4/24 + x^5/80
/// since the closed form cancels down to O(x^3). Above the threshold the
/// closed form still loses about log10(12/x^3) digits, hence long double.
inline double csl_bracket(double x) {
  if (x < csl_series_threshold)
    return x * x * x * (1.0 / 12.0 - x / 24.0 + x * x / 80.0);
  const long double xl = x;
  const long double e = std::exp(-xl);
  return static_cast<double>(e - 1.0L + 0.5L * xl * (e + 1.0L));
}

/// Collapse-noise diffusion rate of a sphere of radius R at frequency omega:
/// (hbar/omega) (8 pi lambda rho0 / m0^2) bracket(R^2/r_c^2) r_c^4 / R^3.
inline double csl_diffusion(const SystemConfig& cfg, double omega) {
  if (!(cfg.sphere_radius > 0))
    throw ConfigError("sphere radius must be > 0");
  if (!(cfg.csl_length > 0))
    throw ConfigError("CSL length must be > 0");
  if (!(omega > 0))
    throw ConfigError("trap frequency must be > 0");
  if (!cfg.csl_enabled || cfg.csl_rate == 0.0)
    return 0.0;
  const double R = cfg.sphere_radius;
  const double rc = cfg.csl_length;
  const double x = (R / rc) * (R / rc);
  const double rc2 = rc * rc;
  return constants::hbar / omega * 8.0 * constants::pi * cfg.csl_rate * cfg.sphere_density /
         (constants::amu * constants::amu) * csl_bracket(x) * (rc2 * rc2) / (R * R * R);
}

inline NoiseBudget budget(const DerivedQuantities& dq, Mode mode) {
  NoiseBudget b;
  b.mode = mode;
  b.D_a = gas_diffusion(dq, mode);
  b.D_t = trap_diffusion(dq, mode);
  b.D_c = cavity_diffusion(dq, mode);
  b.lambda_sph = csl_diffusion(dq.config, dq.omega[index(mode)]);
  b.total_without_csl = b.D_a + b.D_t + b.D_c;
  b.total_with_csl = b.total_without_csl + b.lambda_sph;
  return b;
}

inline std::array<NoiseBudget, 2> budgets(const DerivedQuantities& dq) {
  return {budget(dq, Mode::first), budget(dq, Mode::second)};
}

/// Radius maximizing lambda_sph at fixed omega, lambda and r_c, found by
/// golden-section search on R / r_c in [lo, hi]. Returned in meters.
inline double csl_peak_radius(double csl_length, double lo = 0.5, double hi = 5.0, double tol = 1e-10) {
  auto objective = [](double u) { return csl_bracket(u * u) / (u * u * u); };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c), fd = objective(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  return 0.5 * (a + b) * csl_length;
}

} // namespace cslprobe

#endif // CSLPROBE_NOISE_HPP
