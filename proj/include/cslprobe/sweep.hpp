#ifndef CSLPROBE_SWEEP_HPP
#define CSLPROBE_SWEEP_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dynamics.hpp"
#include "entanglement.hpp"
#include "error.hpp"
#include "hash.hpp"
#include "noise.hpp"
#include "params.hpp"

namespace cslprobe {

// ---------------------------------------------------------------------------
// Single operating point

/// Steady-state entanglement of one CSL variant.
struct SteadyState {
  SquareMatrix<Real, 6> V;
  Real residual = 0;
  Real condition = 0;
  double nu_min = 0;
  double log_negativity = 0;
};

/// Solves the steady state of `model` and extracts the mechanical
/// entanglement. Throws when V fails the bona fide covariance checks.
inline SteadyState steady_state(const LinearModel<Real>& model) {
  const auto sol = solve_lyapunov(model);
  if (!is_physical<Real, 6>(sol.V))
    throw NumericalIntegrityError("steady-state covariance violates the uncertainty relation");
  SteadyState s;
  s.V = sol.V;
  s.residual = sol.residual;
  s.condition = sol.condition;
  const auto nu = symplectic_eigen_min(mechanical_block<Real>(sol.V));
  s.nu_min = static_cast<double>(nu.value);
  s.log_negativity = static_cast<double>(log_negativity_from(nu.value));
  return s;
}

struct PointEvaluation {
  DerivedQuantities derived;
  std::array<NoiseBudget, 2> noise;
  bool stable = false;
  double abscissa = 0;
  std::optional<SteadyState> without_csl;
  std::optional<SteadyState> with_csl;
  std::vector<std::string> warnings;
};

enum class CslVariants { off, on, both };

inline bool wants_off(CslVariants v) { return v != CslVariants::on; }
inline bool wants_on(CslVariants v) { return v != CslVariants::off; }

/// Scheme validity: kappa_eff << omega1 and G << omega1 are scale
/// conditions, so violations only warn.
inline std::vector<std::string> validity_warnings(const DerivedQuantities& dq) {
  std::vector<std::string> w;
  if (dq.omega[0] < 10.0 * dq.kappa_eff)
    w.emplace_back("omega1 < 10 kappa_eff: sideband resolution is marginal");
  if (dq.G[1] > dq.omega[0] / 5.0)
    w.emplace_back("G2 > omega1 / 5: weak-coupling condition is marginal");
  return w;
}

inline PointEvaluation evaluate_point(const SystemConfig& cfg, double omega1, CslVariants variants = CslVariants::both) {
  PointEvaluation p;
  p.derived = derive(cfg, omega1);
  p.noise = budgets(p.derived);
  p.warnings = p.derived.warnings;
  for (auto& w : validity_warnings(p.derived))
    p.warnings.push_back(std::move(w));

  const auto off = build_model<Real>(p.derived, p.noise, false);
  const auto st = is_stable(off);
  p.stable = st.stable;
  p.abscissa = static_cast<double>(st.abscissa);
  if (!p.stable)
    return p;
  if (wants_off(variants))
    p.without_csl = steady_state(off);
  if (wants_on(variants))
    p.with_csl = steady_state(build_model<Real>(p.derived, p.noise, true));
  for (const auto* s : {&p.without_csl, &p.with_csl})
    if (*s && (*s)->condition > Real(lyapunov_condition_warning))
      p.warnings.emplace_back("Lyapunov system is ill-conditioned");
  return p;
}

// ---------------------------------------------------------------------------
// Grids and sweeps

enum class SweepParameter { omega1, radius, csl_rate };

inline std::vector<double> linear_grid(double lo, double hi, int points) {
  if (points < 1)
    throw ConfigError("grid needs at least one point");
  if (points == 1)
    return {lo};
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return g;
}

inline std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0) || !(hi > 0))
    throw ConfigError("log grid bounds must be positive");
  if (points < 1)
    throw ConfigError("grid needs at least one point");
  if (points == 1)
    return {lo};
  std::vector<double> g(static_cast<std::size_t>(points));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < points; ++i)
    g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (points - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

inline constexpr int default_grid_points = 40;

/// 40 log-spaced points on [10 kappa_eff, 500 kappa_eff].
inline std::vector<double> default_omega_grid(const SystemConfig& cfg) {
  const double keff = effective_decay_rate(cavity_decay_rate(cfg), cfg.feedback_reflectivity, cfg.feedback_phase);
  return log_grid(10.0 * keff, 500.0 * keff, default_grid_points);
}

struct SweepSpec {
  SystemConfig base;
  SweepParameter parameter = SweepParameter::omega1;
  std::vector<double> grid;
  CslVariants csl = CslVariants::both;
  double omega1 = 1e4; // used when the swept parameter is not omega1
  std::optional<std::string> preset;
  unsigned threads = 1;
};

struct SweepRow {
  double x = 0;
  DerivedQuantities derived;
  std::array<NoiseBudget, 2> noise;
  bool stable = false;
  double abscissa = 0;
  std::optional<double> en_off, en_on;
  std::optional<double> nu_off, nu_on;
  std::vector<std::string> warnings;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepRow> rows;
  std::string config_hash;
  std::string constants_version{constants::version};
  std::string timestamp;
};

inline void validate_grid(const std::vector<double>& grid) {
  if (grid.empty())
    throw ConfigError("sweep grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw ConfigError("sweep grid must be strictly increasing");
}

inline SweepRow evaluate_row(const SweepSpec& spec, double x) {
  SystemConfig cfg = spec.base;
  double omega1 = spec.omega1;
  switch (spec.parameter) {
  case SweepParameter::omega1: omega1 = x; break;
  case SweepParameter::radius: cfg.sphere_radius = x; break;
  case SweepParameter::csl_rate: cfg.csl_rate = x; break;
  }
  auto p = evaluate_point(cfg, omega1, spec.csl);
  SweepRow row;
  row.x = x;
  row.derived = std::move(p.derived);
  row.noise = p.noise;
  row.stable = p.stable;
  row.abscissa = p.abscissa;
  row.warnings = std::move(p.warnings);
  if (p.without_csl) {
    row.en_off = p.without_csl->log_negativity;
    row.nu_off = p.without_csl->nu_min;
  }
  if (p.with_csl) {
    row.en_on = p.with_csl->log_negativity;
    row.nu_on = p.with_csl->nu_min;
  }
  return row;
}

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Evaluates every grid point. Points are independent; with threads > 1 they
/// are distributed round-robin and the table is assembled in grid order, so
/// the result does not depend on scheduling. Unstable points are recorded;
/// a sweep with no stable point throws InstabilityError.
inline SweepResult run_sweep(const SweepSpec& spec) {
  validate_grid(spec.grid);
  validate(spec.base);

  SweepResult result;
  result.spec = spec;
  result.config_hash = config_hash(spec.base);
  result.timestamp = utc_timestamp();

  const std::size_t n = spec.grid.size();
  std::vector<SweepRow> rows(n);
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < n; i += stride) {
      try {
        rows[i] = evaluate_row(spec, spec.grid[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(spec.threads, 1, n);
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t)
      pool.emplace_back(work, t, workers);
  }
  for (const auto& e : errors)
    if (e)
      std::rethrow_exception(e);

  if (std::none_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.stable; }))
    throw InstabilityError("drift matrix is unstable at every grid point");
  result.rows = std::move(rows);
  return result;
}

// ---------------------------------------------------------------------------
// Analysis of paired curves

/// (E_off - E_on) / E_off per row; empty where E_off is zero or missing.
inline std::vector<std::optional<double>> relative_difference(const SweepResult& result) {
  if (!wants_off(result.spec.csl) || !wants_on(result.spec.csl))
    throw ConfigError("relative difference needs both CSL variants");
  std::vector<std::optional<double>> out;
  out.reserve(result.rows.size());
  for (const auto& r : result.rows) {
    if (r.en_off && r.en_on && *r.en_off > 0)
      out.emplace_back((*r.en_off - *r.en_on) / *r.en_off);
    else
      out.emplace_back(std::nullopt);
  }
  return out;
}

enum class Distinguishability { by_sign, by_gap, indistinguishable };

inline const char* to_string(Distinguishability d) {
  switch (d) {
  case Distinguishability::by_sign: return "distinguishable-by-sign";
  case Distinguishability::by_gap: return "distinguishable-by-gap";
  case Distinguishability::indistinguishable: return "indistinguishable";
  }
  return "?";
}

inline constexpr double default_window_fraction = 0.2;
inline constexpr double default_gap_threshold = 0.10;

struct Discrimination {
  Distinguishability verdict = Distinguishability::indistinguishable;
  int slope_sign_off = 0;
  int slope_sign_on = 0;
  double slope_off = 0; // least-squares dE_N/dx over the window
  double slope_on = 0;
  double mean_gap = 0;  // mean relative difference over defined window points
  std::optional<double> leftmost_gap;
  std::size_t window_points = 0;
};

namespace detail {

inline double window_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

// Slopes below this fraction of (curve scale / window width) count as flat.
inline int slope_sign(double slope, const std::vector<double>& x, const std::vector<double>& y) {
  const double scale = *std::max_element(y.begin(), y.end());
  const double width = x.back() - x.front();
  if (scale <= 0 || std::abs(slope) * width <= 1e-9 * scale)
    return 0;
  return slope > 0 ? 1 : -1;
}

} // namespace detail

/// Compares the two curves over the lowest `window_fraction` of the grid:
/// opposite slope signs are distinguishable by sign; otherwise a mean
/// relative gap of at least `gap_threshold` is distinguishable by gap.
inline Discrimination slope_sign_discriminator(const SweepResult& result,
                                               double window_fraction = default_window_fraction,
                                               double gap_threshold = default_gap_threshold) {
  const auto gaps = relative_difference(result);
  const std::size_t n = result.rows.size();
  const auto w = static_cast<std::size_t>(std::ceil(window_fraction * static_cast<double>(n) - 1e-9));
  if (w < 3)
    throw ConfigError("low-omega window needs at least 3 points for a slope estimate");

  std::vector<double> x, off, on;
  for (std::size_t i = 0; i < w; ++i) {
    const auto& r = result.rows[i];
    if (!r.stable)
      throw InstabilityError("unstable point inside the discriminator window");
    x.push_back(r.x);
    off.push_back(*r.en_off);
    on.push_back(*r.en_on);
  }

  Discrimination d;
  d.window_points = w;
  d.slope_off = detail::window_slope(x, off);
  d.slope_on = detail::window_slope(x, on);
  d.slope_sign_off = detail::slope_sign(d.slope_off, x, off);
  d.slope_sign_on = detail::slope_sign(d.slope_on, x, on);

  double sum = 0;
  int count = 0;
  for (std::size_t i = 0; i < w; ++i) {
    if (gaps[i]) {
      if (!d.leftmost_gap)
        d.leftmost_gap = gaps[i];
      sum += *gaps[i];
      ++count;
    }
  }
  d.mean_gap = count > 0 ? sum / count : 0.0;

  if (d.slope_sign_off != 0 && d.slope_sign_on != 0 && d.slope_sign_off != d.slope_sign_on)
    d.verdict = Distinguishability::by_sign;
  else if (d.mean_gap >= gap_threshold)
    d.verdict = Distinguishability::by_gap;
  else
    d.verdict = Distinguishability::indistinguishable;
  return d;
}

// ---------------------------------------------------------------------------
// Power-law checks

enum class NoiseQuantity { D_t, D_c, D_a, lambda_sph };
enum class ScalingParameter { radius, omega };

inline const char* to_string(NoiseQuantity q) {
  switch (q) {
  case NoiseQuantity::D_t: return "D_t";
  case NoiseQuantity::D_c: return "D_c";
  case NoiseQuantity::D_a: return "D_a";
  case NoiseQuantity::lambda_sph: return "lambda_sph";
  }
  return "?";
}

inline const char* to_string(ScalingParameter p) { return p == ScalingParameter::radius ? "R" : "omega"; }

struct ScalingFit {
  double exponent = 0;         // least-squares slope of log q vs log x
  double min_local_slope = 0;  // over consecutive grid pairs
  double max_local_slope = 0;
  std::vector<double> x, values;
};

inline double noise_component(const NoiseBudget& b, NoiseQuantity q) {
  switch (q) {
  case NoiseQuantity::D_t: return b.D_t;
  case NoiseQuantity::D_c: return b.D_c;
  case NoiseQuantity::D_a: return b.D_a;
  case NoiseQuantity::lambda_sph: return b.lambda_sph;
  }
  return 0;
}

/// Log-log fit of a mode-1 diffusion rate against R or omega1 over
/// [lo, hi]. Couplings follow the config ratios, so G is held fixed while
/// R or omega changes.
inline ScalingFit scaling_check(NoiseQuantity quantity, ScalingParameter parameter, const SystemConfig& cfg,
                                double omega1, double lo, double hi, int points = 11) {
  ScalingFit fit;
  fit.x = log_grid(lo, hi, points);
  for (double x : fit.x) {
    SystemConfig c = cfg;
    double w = omega1;
    if (parameter == ScalingParameter::radius)
      c.sphere_radius = x;
    else
      w = x;
    const double v = noise_component(budget(derive(c, w), Mode::first), quantity);
    if (!(v > 0))
      throw ConfigError(std::string("nonpositive ") + to_string(quantity) + " inside the fit window");
    fit.values.push_back(v);
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < fit.x.size(); ++i) {
    lx.push_back(std::log(fit.x[i]));
    ly.push_back(std::log(fit.values[i]));
  }
  fit.exponent = lx.size() > 1 ? detail::window_slope(lx, ly) : 0.0;
  fit.min_local_slope = std::numeric_limits<double>::infinity();
  fit.max_local_slope = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < lx.size(); ++i) {
    const double s = (ly[i] - ly[i - 1]) / (lx[i] - lx[i - 1]);
    fit.min_local_slope = std::min(fit.min_local_slope, s);
    fit.max_local_slope = std::max(fit.max_local_slope, s);
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Figure presets

struct Preset {
  std::string id;
  std::string description;
  SystemConfig config;
  double omega_min = 0;
  double omega_max = 0;
  int points = default_grid_points;

  std::vector<double> grid() const { return log_grid(omega_min, omega_max, points); }
};

/// Baseline and three weaker-collapse parameter sets. Panels a/d, b/e and
/// c/f share a configuration (diffusion and entanglement views of the same
/// run). Each omega1 window lies inside [10, 500] kappa_eff and spans the
/// range where the CSL-on curve is entangled.
inline std::vector<Preset> presets() {
  const SystemConfig base;

  SystemConfig a = base;
  a.csl_rate = 1e-9;
  a.feedback_reflectivity = 0.996;
  a.coupling_G2_over_keff = 1.2;
  a.coupling_ratio_G1_over_G2 = 0.77;

  SystemConfig b = base;
  b.csl_rate = 1e-10;
  b.sphere_radius = 18e-9;
  b.feedback_reflectivity = 0.999;
  b.coupling_G2_over_keff = 2.2;
  b.coupling_ratio_G1_over_G2 = 0.79;

  SystemConfig c = base;
  c.csl_rate = 1e-11;
  c.sphere_radius = 22e-9;
  c.feedback_reflectivity = 0.999;
  c.coupling_G2_over_keff = 2.0;
  c.coupling_ratio_G1_over_G2 = 0.79;

  return {
      {"fig2", "lambda=1e-8 s^-1, R=0.15 r_c, rB=0.99, G2=1.2 keff, G1=0.72 G2", base, 7.5e3, 2.8e4},
      {"fig3a", "lambda=1e-9 s^-1, R=0.15 r_c, rB=0.996, G2=1.2 keff, G1=0.77 G2", a, 2.0e3, 1.3e4},
      {"fig3b", "lambda=1e-10 s^-1, R=0.18 r_c, rB=0.999, G2=2.2 keff, G1=0.79 G2", b, 1.45e3, 2.55e3},
      {"fig3c", "lambda=1e-11 s^-1, R=0.22 r_c, rB=0.999, G2=2 keff, G1=0.79 G2", c, 6.0e2, 1.4e3},
      {"fig3d", "entanglement view of fig3a", a, 2.0e3, 1.3e4},
      {"fig3e", "entanglement view of fig3b", b, 1.45e3, 2.55e3},
      {"fig3f", "entanglement view of fig3c", c, 6.0e2, 1.4e3},
  };
}

inline Preset find_preset(const std::string& id) {
  for (auto& p : presets())
    if (p.id == id)
      return p;
  throw ConfigError("unknown preset '" + id + "' (expected fig2, fig3a ... fig3f)");
}

inline SweepSpec preset_sweep(const Preset& p, unsigned threads = 1) {
  SweepSpec s;
  s.base = p.config;
  s.parameter = SweepParameter::omega1;
  s.grid = p.grid();
  s.csl = CslVariants::both;
  s.preset = p.id;
  s.threads = threads;
  return s;
}

} // namespace cslprobe

#endif // CSLPROBE_SWEEP_HPP
