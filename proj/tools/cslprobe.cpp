// Command-line front end: noise budgets, linear model dumps, single-point
// entanglement, parameter sweeps, figure presets and power-law checks.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <cslprobe/cslprobe.hpp>

namespace {

using namespace cslprobe;

struct Common {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string format = "csv";
  std::string output;
  std::string output_dir;
  bool dump_config = false;
  bool seedless = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_file, "YAML config file (sections: sphere, cavity, trap, feedback, drive, gas, csl)")
      ->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", c.overrides, "Override a config value, e.g. --set csl.rate=0 or --set sphere.radius='22 nm'");
  cmd->add_option("-f,--format", c.format, "Output format")->check(CLI::IsMember({"csv", "table"}));
  cmd->add_option("-o,--output", c.output, "Write output to this file instead of stdout");
  cmd->add_option("--output-dir", c.output_dir, "Directory for generated files (default: $CSLPROBE_OUTPUT_DIR)");
  cmd->add_flag("--dump-config", c.dump_config, "Print the resolved configuration and exit");
  cmd->add_flag("--seedless", c.seedless, "Accepted for scripting; the pipeline uses no random numbers");
}

CslVariants parse_variants(const std::string& s) {
  if (s == "on")
    return CslVariants::on;
  if (s == "off")
    return CslVariants::off;
  return CslVariants::both;
}

RunManifest resolve_common(const Common& c, const std::string& subcommand) {
  ConfigLayer file;
  if (!c.config_file.empty())
    file = load_config_file(c.config_file);
  ConfigLayer flags;
  for (const auto& o : c.overrides) {
    auto [key, value] = parse_assignment(o);
    if (flags.count(key))
      throw ConfigError("conflicting flags: '" + key + "' set more than once");
    flags[key] = value;
  }
  return resolve(file, flags, subcommand);
}

std::string output_directory(const Common& c) {
  if (!c.output_dir.empty())
    return c.output_dir;
  if (const char* env = std::getenv("CSLPROBE_OUTPUT_DIR"))
    return env;
  return {};
}

Format format_of(const Common& c) { return c.format == "table" ? Format::table : Format::csv; }

/// Writes to --output when given, else stdout.
void deliver(const Common& c, RunManifest& m, const std::vector<Table>& tables) {
  if (c.output.empty()) {
    for (const auto& t : tables)
      emit(std::cout, t, format_of(c));
    return;
  }
  std::ofstream out(c.output, std::ios::binary);
  if (!out)
    throw OutputError("cannot open '" + c.output + "' for writing");
  for (const auto& t : tables)
    emit(out, t, format_of(c));
  if (!out)
    throw OutputError("failed writing '" + c.output + "'");
  m.outputs.push_back(c.output);
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings)
    std::cerr << "warning: " << w << '\n';
}

int run(int argc, char** argv) {
  CLI::App app{"Steady-state entanglement of two levitated nanospheres under collapse-model noise"};
  app.require_subcommand(1);

  Common common;
  double omega1 = 1e4;
  std::string csl = "both";

  auto* rates = app.add_subcommand("rates", "Noise budget per mechanical mode");
  add_common(rates, common);
  rates->add_option("-w,--omega1", omega1, "Trap frequency of sphere 1, s^-1")->capture_default_str();

  auto* model = app.add_subcommand("model", "Drift/diffusion matrices, eigenvalues and stability verdict");
  add_common(model, common);
  model->add_option("-w,--omega1", omega1, "Trap frequency of sphere 1, s^-1")->capture_default_str();
  model->add_option("--csl", csl, "Include collapse noise in D")->check(CLI::IsMember({"on", "off"}))->default_str("on");

  auto* ent = app.add_subcommand("entanglement", "Minimal symplectic eigenvalue and log negativity at one point");
  add_common(ent, common);
  ent->add_option("-w,--omega1", omega1, "Trap frequency of sphere 1, s^-1")->capture_default_str();
  ent->add_option("--csl", csl, "CSL variants")->check(CLI::IsMember({"on", "off", "both"}))->capture_default_str();

  std::string param = "omega1";
  std::optional<double> lo, hi;
  int points = default_grid_points;
  bool log_spacing = false;
  unsigned threads = 1;
  auto* sweep = app.add_subcommand("sweep", "Paired E_N curves over omega1, radius or lambda");
  add_common(sweep, common);
  sweep->add_option("--param", param, "Swept parameter")->check(CLI::IsMember({"omega1", "radius", "lambda"}))->capture_default_str();
  sweep->add_option("--min", lo, "Grid start (SI; default 10 kappa_eff for omega1)");
  sweep->add_option("--max", hi, "Grid end (SI; default 500 kappa_eff for omega1)");
  sweep->add_option("--points", points, "Grid points")->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_flag("--log", log_spacing, "Logarithmic spacing");
  sweep->add_option("--csl", csl, "CSL variants")->check(CLI::IsMember({"on", "off", "both"}))->capture_default_str();
  sweep->add_option("-w,--omega1", omega1, "Fixed omega1 when sweeping radius or lambda")->capture_default_str();
  sweep->add_option("-j,--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::vector<std::string> preset_ids;
  bool plot_data = false;
  auto* reproduce = app.add_subcommand("reproduce", "Run figure presets (fig2, fig3a ... fig3f)");
  add_common(reproduce, common);
  reproduce->add_option("-p,--preset", preset_ids, "Preset id(s)")->required();
  reproduce->add_flag("--plot-data", plot_data, "Emit (x, y, series) triples instead of the wide table");
  reproduce->add_option("-j,--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string quantity = "all";
  std::string scale_param = "all";
  auto* scaling = app.add_subcommand("scaling-check", "Log-log exponents of the diffusion rates vs R and omega");
  add_common(scaling, common);
  scaling->add_option("-q,--quantity", quantity, "Rate")->check(CLI::IsMember({"all", "D_t", "D_c", "D_a", "lambda_sph"}))->capture_default_str();
  scaling->add_option("--param", scale_param, "Parameter")->check(CLI::IsMember({"all", "R", "omega"}))->capture_default_str();
  scaling->add_option("--min", lo, "Window start (SI)");
  scaling->add_option("--max", hi, "Window end (SI)");
  scaling->add_option("--points", points, "Window points")->check(CLI::PositiveNumber);
  scaling->add_option("-w,--omega1", omega1, "omega1 for radius scans, window start for omega scans")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::config_error);
  }

  CLI::App* active = app.get_subcommands().front();
  RunManifest manifest = resolve_common(common, active->get_name());
  if (common.dump_config) {
    std::cout << to_manifest_text(manifest);
    return 0;
  }
  const SystemConfig& cfg = manifest.config;

  if (active == rates) {
    const auto dq = derive(cfg, omega1);
    print_warnings(dq.warnings);
    deliver(common, manifest, {rates_table(dq, budgets(dq))});
  } else if (active == model) {
    const auto dq = derive(cfg, omega1);
    print_warnings(dq.warnings);
    const auto m = build_model<Real>(dq, budgets(dq), csl == "on");
    deliver(common, manifest, {model_table(dq, m, is_stable(m))});
  } else if (active == ent) {
    const auto p = evaluate_point(cfg, omega1, parse_variants(csl));
    print_warnings(p.warnings);
    if (!p.stable)
      throw InstabilityError("drift matrix is unstable; no steady state");
    Table t;
    t.comment = provenance(manifest.config_hash);
    t.header = {"variant", "nu_min", "E_N", "lyapunov_residual"};
    for (const auto& [name, s] : {std::pair{"off", &p.without_csl}, std::pair{"on", &p.with_csl}})
      if (*s)
        t.rows.push_back({name, format_number((*s)->nu_min), format_number((*s)->log_negativity),
                          format_number(static_cast<double>((*s)->residual))});
    deliver(common, manifest, {t, rates_table(p.derived, p.noise)});
  } else if (active == sweep) {
    SweepSpec spec;
    spec.base = cfg;
    spec.csl = parse_variants(csl);
    spec.omega1 = omega1;
    spec.threads = threads;
    if (param == "omega1") {
      spec.parameter = SweepParameter::omega1;
      if (!lo && !hi && points == default_grid_points && !log_spacing) {
        spec.grid = default_omega_grid(cfg);
      } else {
        const auto def = default_omega_grid(cfg);
        const double a = lo.value_or(def.front()), b = hi.value_or(def.back());
        spec.grid = log_spacing || (!lo && !hi) ? log_grid(a, b, points) : linear_grid(a, b, points);
      }
    } else {
      spec.parameter = param == "radius" ? SweepParameter::radius : SweepParameter::csl_rate;
      if (!lo || !hi)
        throw ConfigError("--min and --max are required when sweeping " + param);
      spec.grid = log_spacing ? log_grid(*lo, *hi, points) : linear_grid(*lo, *hi, points);
    }
    const auto result = run_sweep(spec);
    std::vector<std::string> warnings;
    for (const auto& r : result.rows)
      for (const auto& w : r.warnings)
        if (std::find(warnings.begin(), warnings.end(), w) == warnings.end())
          warnings.push_back(w);
    print_warnings(warnings);
    deliver(common, manifest, {sweep_table(result)});
  } else if (active == reproduce) {
    const auto dir = output_directory(common);
    for (const auto& id : preset_ids) {
      auto preset = find_preset(id);
      // Overrides from file/flags apply on top of the preset parameters.
      ConfigLayer file;
      if (!common.config_file.empty())
        file = load_config_file(common.config_file);
      apply_layer(preset.config, file);
      ConfigLayer flags;
      for (const auto& o : common.overrides)
        flags.insert(parse_assignment(o));
      apply_layer(preset.config, flags);
      validate(preset.config);

      const auto result = run_sweep(preset_sweep(preset, threads));
      const Table t = plot_data ? plot_table(result) : sweep_table(result);
      if (!common.output.empty() && preset_ids.size() == 1) {
        write_file(common.output, t, format_of(common));
        manifest.outputs.push_back(common.output);
      } else if (!dir.empty()) {
        std::filesystem::create_directories(dir);
        const auto path = (std::filesystem::path(dir) / (id + (plot_data ? "_plot.csv" : ".csv"))).string();
        write_file(path, t, format_of(common));
        manifest.outputs.push_back(path);
        std::cerr << "wrote " << path << '\n';
      } else {
        emit(std::cout, t, format_of(common));
      }
      if (!plot_data) {
        const auto d = slope_sign_discriminator(result);
        std::cerr << id << ": " << to_string(d.verdict) << " (slope signs off/on " << d.slope_sign_off << "/"
                  << d.slope_sign_on << ", low-omega mean relative difference " << d.mean_gap;
        if (d.leftmost_gap)
          std::cerr << ", leftmost " << *d.leftmost_gap;
        std::cerr << ")\n";
      }
    }
  } else if (active == scaling) {
    std::vector<NoiseQuantity> qs;
    for (auto q : {NoiseQuantity::D_t, NoiseQuantity::D_c, NoiseQuantity::D_a, NoiseQuantity::lambda_sph})
      if (quantity == "all" || quantity == to_string(q))
        qs.push_back(q);
    std::vector<ScalingParameter> ps;
    for (auto p : {ScalingParameter::radius, ScalingParameter::omega})
      if (scale_param == "all" || scale_param == to_string(p))
        ps.push_back(p);
    const int n = points == default_grid_points ? 11 : points;

    Table t;
    t.comment = provenance(manifest.config_hash);
    t.header = {"quantity", "parameter", "min", "max", "exponent", "min_local_slope", "max_local_slope"};
    for (auto p : ps)
      for (auto q : qs) {
        double a, b;
        if (p == ScalingParameter::omega) {
          a = lo.value_or(omega1);
          b = hi.value_or(10.0 * omega1);
        } else if (q == NoiseQuantity::lambda_sph) {
          a = lo.value_or(0.1 * cfg.csl_length);
          b = hi.value_or(2.3 * cfg.csl_length);
        } else {
          a = lo.value_or(cfg.sphere_radius);
          b = hi.value_or(10.0 * cfg.sphere_radius);
        }
        const auto fit = scaling_check(q, p, cfg, omega1, a, b, n);
        t.rows.push_back({to_string(q), to_string(p), format_number(a), format_number(b), format_number(fit.exponent),
                          format_number(fit.min_local_slope), format_number(fit.max_local_slope)});
      }
    deliver(common, manifest, {t});
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::config_error);
  } catch (const InstabilityError& e) {
    std::cerr << "unstable: " << e.what() << '\n';
    return static_cast<int>(ExitCode::unstable_everywhere);
  } catch (const NumericalIntegrityError& e) {
    std::cerr << "numerical integrity failure: " << e.what() << '\n';
    return static_cast<int>(ExitCode::numerical_integrity);
  } catch (const OutputError& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::output_error);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::failure);
  }
}
