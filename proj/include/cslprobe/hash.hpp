#ifndef CSLPROBE_HASH_HPP
#define CSLPROBE_HASH_HPP

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "constants.hpp"
#include "params.hpp"

namespace cslprobe {

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Stable, platform-independent text form of a configuration: one
/// `name=value` line per field, doubles printed with 17 significant digits.
inline std::string canonical_form(const SystemConfig& c) {
  std::string out;
  auto put = [&out](const char* name, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s=%.17g\n", name, v);
    out += buf;
  };
  put("sphere_radius", c.sphere_radius);
  put("sphere_density", c.sphere_density);
  put("permittivity", c.permittivity);
  put("cavity_length", c.cavity_length);
  if (c.finesse)
    put("finesse", *c.finesse);
  else
    put("cavity_decay", c.cavity_decay);
  put("mirror_curvature", c.mirror_curvature);
  put("cavity_wavelength", c.cavity_wavelength);
  put("trap_wavelength", c.trap_wavelength);
  put("numerical_aperture", c.numerical_aperture);
  put("omega2_over_omega1", c.omega2_over_omega1);
  put("feedback_reflectivity", c.feedback_reflectivity);
  put("feedback_phase", c.feedback_phase);
  put("coupling_G2_over_keff", c.coupling_G2_over_keff);
  put("coupling_ratio_G1_over_G2", c.coupling_ratio_G1_over_G2);
  put("detuning", c.detuning);
  put("gas_temperature", c.gas_temperature);
  put("gas_pressure", c.gas_pressure);
  put("gas_molecule_mass", c.gas_molecule_mass);
  put("csl_rate", c.csl_rate);
  put("csl_length", c.csl_length);
  out += c.csl_enabled ? "csl_enabled=1\n" : "csl_enabled=0\n";
  out += "constants=";
  out += constants::version;
  out += '\n';
  return out;
}

inline std::string config_hash(const SystemConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_form(c))));
  return buf;
}

} // namespace cslprobe

#endif // CSLPROBE_HASH_HPP
