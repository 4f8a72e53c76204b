#ifndef CSLPROBE_CONFIG_HPP
#define CSLPROBE_CONFIG_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "constants.hpp"
#include "error.hpp"
#include "hash.hpp"
#include "params.hpp"

namespace cslprobe {

enum class Dimension { none, length, rate, temperature, pressure, mass, density, angle, boolean };

namespace detail {

// Submultiples divide by an exact power of ten so that "22 nm" parses to
// the same double as the literal 22e-9.
struct UnitFactor {
  std::string_view suffix;
  double factor;
  bool divide = false;

  double apply(double v) const { return divide ? v / factor : v * factor; }
};

// Frequencies labelled Hz are taken as angular rates in s^-1.
inline const std::vector<UnitFactor>& units_for(Dimension d) {
  static const std::vector<UnitFactor> none{};
  static const std::vector<UnitFactor> length{{"m", 1.0}, {"cm", 1e2, true}, {"mm", 1e3, true}, {"um", 1e6, true}, {"nm", 1e9, true}};
  static const std::vector<UnitFactor> rate{{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"s^-1", 1.0}, {"1/s", 1.0}};
  static const std::vector<UnitFactor> temperature{{"K", 1.0}, {"mK", 1e3, true}, {"uK", 1e6, true}};
  static const std::vector<UnitFactor> pressure{{"Pa", 1.0}, {"Torr", constants::torr}, {"mbar", 100.0}};
  static const std::vector<UnitFactor> mass{{"kg", 1.0}, {"amu", constants::amu}};
  static const std::vector<UnitFactor> density{{"kg/m3", 1.0}, {"kg/m^3", 1.0}, {"g/cm3", 1e3}, {"g/cm^3", 1e3}};
  static const std::vector<UnitFactor> angle{{"rad", 1.0}};
  switch (d) {
  case Dimension::length: return length;
  case Dimension::rate: return rate;
  case Dimension::temperature: return temperature;
  case Dimension::pressure: return pressure;
  case Dimension::mass: return mass;
  case Dimension::density: return density;
  case Dimension::angle: return angle;
  default: return none;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

} // namespace detail

/// Parses "<number>[ ]<unit>" into SI. A bare number is already SI.
inline double parse_quantity(std::string_view text, Dimension dim, std::string_view key = "value") {
  const auto s = detail::trim(text);
  double v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end == s.data())
    throw ConfigError("cannot parse number for '" + std::string(key) + "': '" + std::string(text) + "'");
  const auto unit = detail::trim(std::string_view(end, static_cast<std::size_t>(s.data() + s.size() - end)));
  if (unit.empty())
    return v;
  for (const auto& u : detail::units_for(dim))
    if (u.suffix == unit)
      return u.apply(v);
  throw ConfigError("unknown unit '" + std::string(unit) + "' for '" + std::string(key) + "'");
}

inline bool parse_bool(std::string_view text, std::string_view key) {
  const auto s = detail::trim(text);
  if (s == "true" || s == "on" || s == "yes" || s == "1")
    return true;
  if (s == "false" || s == "off" || s == "no" || s == "0")
    return false;
  throw ConfigError("cannot parse boolean for '" + std::string(key) + "': '" + std::string(text) + "'");
}

/// One configurable field, addressed as "section.key".
struct ConfigField {
  std::string name;
  Dimension dimension;
  std::function<void(SystemConfig&, double)> set;
  std::function<std::optional<double>(const SystemConfig&)> get;
};

inline const std::vector<ConfigField>& config_fields() {
  using C = SystemConfig;
  auto num = [](std::string name, Dimension dim, double C::*member) {
    return ConfigField{std::move(name), dim, [member](C& c, double v) { c.*member = v; },
                       [member](const C& c) { return std::optional<double>(c.*member); }};
  };
  static const std::vector<ConfigField> fields{
      num("sphere.radius", Dimension::length, &C::sphere_radius),
      num("sphere.density", Dimension::density, &C::sphere_density),
      num("sphere.permittivity", Dimension::none, &C::permittivity),
      num("cavity.length", Dimension::length, &C::cavity_length),
      ConfigField{"cavity.decay", Dimension::rate,
                  [](C& c, double v) {
                    c.cavity_decay = v;
                    c.finesse.reset();
                  },
                  [](const C& c) { return c.finesse ? std::nullopt : std::optional<double>(c.cavity_decay); }},
      ConfigField{"cavity.finesse", Dimension::none, [](C& c, double v) { c.finesse = v; },
                  [](const C& c) { return c.finesse; }},
      num("cavity.mirror_curvature", Dimension::length, &C::mirror_curvature),
      num("cavity.wavelength", Dimension::length, &C::cavity_wavelength),
      num("trap.wavelength", Dimension::length, &C::trap_wavelength),
      num("trap.numerical_aperture", Dimension::none, &C::numerical_aperture),
      num("trap.omega2_over_omega1", Dimension::none, &C::omega2_over_omega1),
      num("feedback.reflectivity", Dimension::none, &C::feedback_reflectivity),
      num("feedback.phase", Dimension::angle, &C::feedback_phase),
      num("drive.G2_over_kappa_eff", Dimension::none, &C::coupling_G2_over_keff),
      num("drive.G1_over_G2", Dimension::none, &C::coupling_ratio_G1_over_G2),
      num("drive.detuning", Dimension::rate, &C::detuning),
      num("gas.temperature", Dimension::temperature, &C::gas_temperature),
      num("gas.pressure", Dimension::pressure, &C::gas_pressure),
      num("gas.molecule_mass", Dimension::mass, &C::gas_molecule_mass),
      num("csl.rate", Dimension::rate, &C::csl_rate),
      num("csl.length", Dimension::length, &C::csl_length),
      ConfigField{"csl.enabled", Dimension::boolean, [](C& c, double v) { c.csl_enabled = v != 0.0; },
                  [](const C& c) { return std::optional<double>(c.csl_enabled ? 1.0 : 0.0); }},
  };
  return fields;
}

inline const ConfigField& find_field(std::string_view name) {
  for (const auto& f : config_fields())
    if (f.name == name)
      return f;
  throw ConfigError("unknown configuration key '" + std::string(name) + "'");
}

/// A set of "section.key" -> raw text assignments belonging to one layer
/// (file or command line).
using ConfigLayer = std::map<std::string, std::string>;

inline std::string node_text(const YAML::Node& n) {
  if (!n.IsScalar())
    throw ConfigError("expected a scalar value");
  return n.Scalar();
}

/// Reads a nested-section YAML document into a layer. Unknown sections or keys
/// are rejected by name.
inline ConfigLayer parse_config_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed config file: ") + e.what());
  }
  ConfigLayer layer;
  if (root.IsNull())
    return layer;
  if (!root.IsMap())
    throw ConfigError("config file must be a mapping of sections");
  for (const auto& section : root) {
    const auto sname = section.first.as<std::string>();
    if (!section.second.IsMap())
      throw ConfigError("section '" + sname + "' must be a mapping");
    for (const auto& kv : section.second) {
      const auto key = sname + "." + kv.first.as<std::string>();
      find_field(key);
      try {
        layer[key] = node_text(kv.second);
      } catch (const ConfigError&) {
        throw ConfigError("value of '" + key + "' must be a scalar");
      }
    }
  }
  return layer;
}

inline ConfigLayer load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Parses a "section.key=value" command-line assignment.
inline std::pair<std::string, std::string> parse_assignment(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("override '" + std::string(text) + "' is not of the form section.key=value");
  std::string key(detail::trim(text.substr(0, eq)));
  find_field(key);
  return {key, std::string(detail::trim(text.substr(eq + 1)))};
}

inline void apply_layer(SystemConfig& cfg, const ConfigLayer& layer) {
  if (layer.count("cavity.decay") && layer.count("cavity.finesse"))
    throw ConfigError("conflicting settings: cavity.decay and cavity.finesse given together");
  for (const auto& [key, text] : layer) {
    const auto& f = find_field(key);
    const double v = f.dimension == Dimension::boolean ? (parse_bool(text, key) ? 1.0 : 0.0)
                                                       : parse_quantity(text, f.dimension, key);
    f.set(cfg, v);
  }
}

struct RunManifest {
  SystemConfig config;
  std::string constants_version{constants::version};
  std::string subcommand;
  std::vector<std::string> outputs;
  std::string config_hash;

  bool operator==(const RunManifest&) const = default;
};

/// defaults < file < flags, each layer applied once.
inline RunManifest resolve(const ConfigLayer& file, const ConfigLayer& flags, std::string subcommand = {}) {
  RunManifest m;
  apply_layer(m.config, file);
  apply_layer(m.config, flags);
  validate(m.config);
  m.subcommand = std::move(subcommand);
  m.config_hash = config_hash(m.config);
  return m;
}

/// Resolved configuration as a config file (SI values, 17 digits), so that
/// parsing the output reproduces the configuration exactly.
inline std::string to_config_text(const SystemConfig& cfg) {
  std::ostringstream os;
  std::string current;
  for (const auto& f : config_fields()) {
    const auto v = f.get(cfg);
    if (!v)
      continue;
    const auto dot = f.name.find('.');
    const auto section = f.name.substr(0, dot);
    if (section != current) {
      os << section << ":\n";
      current = section;
    }
    os << "  " << f.name.substr(dot + 1) << ": ";
    if (f.dimension == Dimension::boolean) {
      os << (*v != 0.0 ? "true" : "false");
    } else {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", *v);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

inline std::string to_manifest_text(const RunManifest& m) {
  std::ostringstream os;
  os << "# subcommand: " << m.subcommand << "\n";
  os << "# constants: " << m.constants_version << "\n";
  os << "# config_hash: " << m.config_hash << "\n";
  for (const auto& o : m.outputs)
    os << "# output: " << o << "\n";
  os << to_config_text(m.config);
  return os.str();
}

} // namespace cslprobe

#endif // CSLPROBE_CONFIG_HPP
