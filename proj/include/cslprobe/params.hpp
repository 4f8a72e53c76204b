#ifndef CSLPROBE_PARAMS_HPP
#define CSLPROBE_PARAMS_HPP

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "constants.hpp"
#include "error.hpp"

namespace cslprobe {

/// Mechanical mode label: the sphere trapped at omega1 (blue-sideband drive)
/// or the one at omega2 (red-sideband drive).
enum class Mode : int { first = 0, second = 1 };

inline constexpr std::array<Mode, 2> modes{Mode::first, Mode::second};

constexpr std::size_t index(Mode m) noexcept { return static_cast<std::size_t>(m); }
constexpr int number(Mode m) noexcept { return static_cast<int>(m) + 1; }

/// Physical inputs, SI units throughout; every rate is an angular rate in s^-1.
/// Defaults reproduce the baseline setup (diamond spheres, R = 0.15 r_c,
/// r_B = 0.99, G2 = 1.2 kappa_eff, G1 = 0.72 G2).
struct SystemConfig {
  // sphere
  double sphere_radius = 15e-9;   // m
  double sphere_density = 3500.0; // kg/m^3
  double permittivity = 5.76;

  // cavity
  double cavity_length = 0.04;              // m
  double cavity_decay = 2.0e4;              // s^-1, used unless finesse is set
  std::optional<double> finesse;           // kappa = pi c / (2 F L) when present
  double mirror_curvature = 0.04 / 1.5;     // m
  double cavity_wavelength = 1064e-9;       // m

  // trap
  double trap_wavelength = 1064e-9; // m
  double numerical_aperture = 0.8;
  double omega2_over_omega1 = 2.0;

  // coherent feedback
  double feedback_reflectivity = 0.99;
  double feedback_phase = 0.0; // rad

  // drive
  double coupling_G2_over_keff = 1.2;
  double coupling_ratio_G1_over_G2 = 0.72;
  double detuning = 0.0; // s^-1

  // residual gas
  double gas_temperature = 10e-3;                        // K
  double gas_pressure = 1e-12 * constants::torr;         // Pa
  double gas_molecule_mass = 28.97 * constants::amu;     // kg

  // collapse model
  double csl_rate = 1e-8;       // s^-1
  double csl_length = 100e-9;   // m
  bool csl_enabled = true;

  bool operator==(const SystemConfig&) const = default;
};

/// Everything computed from a SystemConfig at one trap frequency omega1.
/// Keeps a copy of the config it was derived from.
struct DerivedQuantities {
  SystemConfig config;

  double kappa = 0;      // s^-1
  double kappa_eff = 0;  // s^-1
  double mass = 0;       // kg
  double sphere_volume = 0;
  double waist_cavity = 0; // W0, m
  double waist_trap = 0;   // Wt, m
  double mode_volume = 0;  // Vc, m^3
  double gamma = 0;        // s^-1
  double mean_gas_speed = 0;
  double eps_c = 0;
  double k_c = 0;            // m^-1
  double omega_cavity = 0;   // s^-1
  double omega_trap_laser = 0;

  std::array<double, 2> omega{};       // trap frequencies
  std::array<double, 2> intensity{};   // trap intensities, W/m^2
  std::array<double, 2> g{};           // bare couplings
  std::array<double, 2> G{};           // effective couplings
  std::array<double, 2> alpha{};       // photon amplitudes
  double n_ph = 0;

  std::vector<std::string> warnings;
};

inline double kappa_from_finesse(double finesse, double length) {
  if (!(finesse > 0) || !(length > 0))
    throw ConfigError("finesse and cavity length must be positive");
  return constants::pi * constants::c / (2.0 * finesse * length);
}

inline double cavity_decay_rate(const SystemConfig& cfg) {
  return cfg.finesse ? kappa_from_finesse(*cfg.finesse, cfg.cavity_length) : cfg.cavity_decay;
}

inline double effective_decay_rate(double kappa, double reflectivity, double phase) {
  return kappa * (1.0 - std::abs(reflectivity) * std::cos(phase));
}

/// Throws ConfigError naming the first violated constraint.
inline void validate(const SystemConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok)
      throw ConfigError(std::string("invalid parameter: ") + what);
  };
  require(c.sphere_radius > 0, "sphere radius must be > 0");
  require(c.sphere_density > 0, "sphere density must be > 0");
  require(c.permittivity > 1, "permittivity must be > 1");
  require(c.cavity_length > 0, "cavity length must be > 0");
  require(c.cavity_wavelength > 0, "cavity wavelength must be > 0");
  require(c.trap_wavelength > 0, "trap wavelength must be > 0");
  require(c.gas_temperature > 0, "gas temperature must be > 0");
  require(c.gas_pressure >= 0, "gas pressure must be >= 0");
  require(c.gas_molecule_mass > 0, "gas molecule mass must be > 0");
  require(c.numerical_aperture > 0 && c.numerical_aperture <= 1, "numerical aperture must lie in (0, 1]");
  require(c.feedback_reflectivity >= 0 && c.feedback_reflectivity <= 1, "feedback reflectivity must lie in [0, 1]");
  require(c.csl_length > 0, "CSL length must be > 0");
  require(c.csl_rate >= 0, "CSL rate must be >= 0");
  require(c.omega2_over_omega1 > 0, "omega2/omega1 must be > 0");
  require(c.coupling_G2_over_keff >= 0, "G2/kappa_eff must be >= 0");
  require(!c.finesse || *c.finesse > 0, "finesse must be > 0");
  require(c.finesse || c.cavity_decay > 0, "cavity decay rate must be > 0");
  require(2.0 * c.mirror_curvature / c.cavity_length - 1.0 > 0,
          "2 Rc / L - 1 must be > 0 (cavity waist undefined)");
  require(std::isfinite(c.detuning) && std::isfinite(c.feedback_phase), "detuning and phase must be finite");
}

/// Gas damping rate gamma = (16/pi) P_a / (v_bar R rho0).
inline double damping_rate(const SystemConfig& c) {
  if (!(c.gas_temperature > 0) || !(c.sphere_radius > 0) || !(c.sphere_density > 0))
    throw ConfigError("damping rate needs T > 0, R > 0, rho0 > 0");
  const double v_bar = std::sqrt(3.0 * constants::k_B * c.gas_temperature / c.gas_molecule_mass);
  return 16.0 / constants::pi * c.gas_pressure / (v_bar * c.sphere_radius * c.sphere_density);
}

/// Cavity mode waist W0 = sqrt(lambda_c L sqrt(2 Rc/L - 1) / (2 pi)).
inline double cavity_waist(const SystemConfig& c) {
  const double shape = 2.0 * c.mirror_curvature / c.cavity_length - 1.0;
  if (!(shape > 0))
    throw ConfigError("2 Rc / L - 1 must be > 0 (cavity waist undefined)");
  return std::sqrt(c.cavity_wavelength * c.cavity_length * std::sqrt(shape) / (2.0 * constants::pi));
}

/// Computes all single-point derived quantities at trap frequency omega1.
///
/// The trap intensities are obtained by inverting
/// omega_j = sqrt(4 eps_c I_j / (rho0 c Wt^2)), and the photon amplitudes
/// as alpha_j = G_j / g_j, so drive powers never appear.
inline DerivedQuantities derive(const SystemConfig& cfg, double omega1) {
  validate(cfg);
  if (!(omega1 > 0))
    throw ConfigError("omega1 must be > 0");

  using namespace constants;
  DerivedQuantities d;
  d.config = cfg;

  d.kappa = cavity_decay_rate(cfg);
  d.kappa_eff = effective_decay_rate(d.kappa, cfg.feedback_reflectivity, cfg.feedback_phase);
  if (!(d.kappa_eff > 0))
    throw ConfigError("effective cavity decay rate must be > 0");

  const double R3 = cfg.sphere_radius * cfg.sphere_radius * cfg.sphere_radius;
  d.sphere_volume = 4.0 / 3.0 * pi * R3;
  d.mass = d.sphere_volume * cfg.sphere_density;
  d.waist_cavity = cavity_waist(cfg);
  d.mode_volume = pi * cfg.cavity_length * d.waist_cavity * d.waist_cavity / 4.0;
  d.waist_trap = cfg.cavity_wavelength / (pi * cfg.numerical_aperture);
  d.mean_gas_speed = std::sqrt(3.0 * k_B * cfg.gas_temperature / cfg.gas_molecule_mass);
  d.gamma = damping_rate(cfg);
  d.eps_c = 3.0 * (cfg.permittivity - 1.0) / (cfg.permittivity + 2.0);
  d.k_c = 2.0 * pi / cfg.cavity_wavelength;
  d.omega_cavity = 2.0 * pi * c / cfg.cavity_wavelength;
  d.omega_trap_laser = 2.0 * pi * c / cfg.trap_wavelength;

  d.omega = {omega1, cfg.omega2_over_omega1 * omega1};
  d.G[1] = cfg.coupling_G2_over_keff * d.kappa_eff;
  d.G[0] = cfg.coupling_ratio_G1_over_G2 * d.G[1];

  const double polarizability = (cfg.permittivity - 1.0) / (cfg.permittivity + 2.0);
  const double geometric = d.omega_cavity * d.k_c * polarizability * 3.0 * d.sphere_volume / (4.0 * d.mode_volume);
  d.n_ph = 0.0;
  for (std::size_t j = 0; j < 2; ++j) {
    const double w = d.omega[j];
    d.intensity[j] = w * w * cfg.sphere_density * c * d.waist_trap * d.waist_trap / (4.0 * d.eps_c);
    d.g[j] = geometric * std::sqrt(hbar / (d.mass * w));
    d.alpha[j] = d.G[j] / d.g[j];
    d.n_ph += d.alpha[j] * d.alpha[j];
  }

  const double ratio = std::abs(cfg.coupling_ratio_G1_over_G2);
  if (!(ratio > 0 && ratio < 1))
    d.warnings.emplace_back("|G1/G2| outside (0, 1): the linearized model is not expected to be stable");
  return d;
}

} // namespace cslprobe

#endif // CSLPROBE_PARAMS_HPP
