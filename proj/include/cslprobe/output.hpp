#ifndef CSLPROBE_OUTPUT_HPP
#define CSLPROBE_OUTPUT_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "error.hpp"
#include "noise.hpp"
#include "sweep.hpp"

namespace cslprobe {

enum class Format { csv, table };

/// A rectangular table of already-formatted cells plus a provenance line.
struct Table {
  std::string comment;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Scientific notation with 12 significant digits; "nan" for missing values.
inline std::string format_number(double v) {
  if (std::isnan(v))
    return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

inline std::string format_number(const std::optional<double>& v) { return v ? format_number(*v) : "nan"; }

namespace detail {

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"')
      q += '"';
    q += ch;
  }
  return q + '"';
}

} // namespace detail

inline void write_csv(std::ostream& os, const Table& t) {
  os << "# " << t.comment << '\n';
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      os << (i ? "," : "") << detail::csv_cell(cells[i]);
    os << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows)
    line(r);
}

inline void write_pretty(std::ostream& os, const Table& t) {
  std::vector<std::size_t> width(t.header.size(), 0);
  for (std::size_t i = 0; i < t.header.size(); ++i)
    width[i] = t.header[i].size();
  for (const auto& r : t.rows)
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i)
      width[i] = std::max(width[i], r[i].size());
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      os << (i ? "  " : "") << cells[i];
      if (i + 1 < cells.size())
        os << std::string(width[i] - cells[i].size(), ' ');
    }
    os << '\n';
  };
  os << "# " << t.comment << '\n';
  line(t.header);
  for (const auto& r : t.rows)
    line(r);
}

inline void emit(std::ostream& os, const Table& t, Format f) {
  if (f == Format::csv)
    write_csv(os, t);
  else
    write_pretty(os, t);
}

inline std::string to_string(const Table& t, Format f) {
  std::ostringstream os;
  emit(os, t, f);
  return os.str();
}

inline void write_file(const std::string& path, const Table& t, Format f) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw OutputError("cannot open '" + path + "' for writing");
  emit(out, t, f);
  out.flush();
  if (!out)
    throw OutputError("failed writing '" + path + "'");
}

inline std::string provenance(const std::string& hash, const std::optional<std::string>& preset = std::nullopt) {
  std::string s = "config_hash=" + hash + " constants=" + std::string(constants::version);
  if (preset)
    s += " preset=" + *preset;
  return s;
}

// ---------------------------------------------------------------------------
// Tables for each result type

inline Table rates_table(const DerivedQuantities& dq, const std::array<NoiseBudget, 2>& noise) {
  Table t;
  t.comment = provenance(config_hash(dq.config));
  t.header = {"mode", "omega", "D_t", "D_c", "D_a", "lambda_sph", "total_no_csl", "total_csl"};
  for (const auto& b : noise)
    t.rows.push_back({std::to_string(number(b.mode)), format_number(dq.omega[index(b.mode)]), format_number(b.D_t),
                      format_number(b.D_c), format_number(b.D_a), format_number(b.lambda_sph),
                      format_number(b.total_without_csl), format_number(b.total_with_csl)});
  return t;
}

/// Long-form dump of a linear model: matrix entries, eigenvalues, verdict.
inline Table model_table(const DerivedQuantities& dq, const LinearModel<Real>& m, const StabilityReport<Real>& st) {
  Table t;
  t.comment = provenance(config_hash(dq.config)) + " order=x1,p1,x2,p2,X,Y";
  t.header = {"item", "row", "col", "real", "imag"};
  for (const auto* which : {"A", "D"}) {
    const auto& M = which[0] == 'A' ? m.drift : m.diffusion;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        t.rows.push_back({which, std::to_string(i), std::to_string(j), format_number(static_cast<double>(M(i, j))),
                          format_number(0.0)});
  }
  for (std::size_t k = 0; k < st.eigenvalues.size(); ++k)
    t.rows.push_back({"eigenvalue", std::to_string(k), "", format_number(static_cast<double>(st.eigenvalues[k].real())),
                      format_number(static_cast<double>(st.eigenvalues[k].imag()))});
  t.rows.push_back({"abscissa", "", "", format_number(static_cast<double>(st.abscissa)), format_number(0.0)});
  t.rows.push_back({"stable", "", "", st.stable ? "1" : "0", ""});
  return t;
}

inline const char* parameter_name(SweepParameter p) {
  switch (p) {
  case SweepParameter::omega1: return "omega1";
  case SweepParameter::radius: return "radius";
  case SweepParameter::csl_rate: return "lambda";
  }
  return "?";
}

/// Columns: omega1, omega2, D_t1, D_c1, D_a1, lambda_sph1, D_t2, D_c2, D_a2,
/// lambda_sph2, stable, E_N_off, E_N_on, rel_diff (preceded by the swept
/// parameter when that is not omega1).
inline Table sweep_table(const SweepResult& r) {
  Table t;
  t.comment = provenance(r.config_hash, r.spec.preset);
  const bool extra = r.spec.parameter != SweepParameter::omega1;
  if (extra)
    t.header.emplace_back(parameter_name(r.spec.parameter));
  for (const char* h : {"omega1", "omega2", "D_t1", "D_c1", "D_a1", "lambda_sph1", "D_t2", "D_c2", "D_a2",
                        "lambda_sph2", "stable", "E_N_off", "E_N_on", "rel_diff"})
    t.header.emplace_back(h);

  std::vector<std::optional<double>> gaps(r.rows.size());
  if (wants_off(r.spec.csl) && wants_on(r.spec.csl))
    gaps = relative_difference(r);
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    std::vector<std::string> cells;
    if (extra)
      cells.push_back(format_number(row.x));
    cells.push_back(format_number(row.derived.omega[0]));
    cells.push_back(format_number(row.derived.omega[1]));
    for (const auto& b : row.noise)
      for (double v : {b.D_t, b.D_c, b.D_a, b.lambda_sph})
        cells.push_back(format_number(v));
    cells.emplace_back(row.stable ? "1" : "0");
    cells.push_back(format_number(row.en_off));
    cells.push_back(format_number(row.en_on));
    cells.push_back(format_number(gaps[i]));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

/// (x, y, series) triples for external plotting.
inline Table plot_table(const SweepResult& r) {
  Table t;
  t.comment = provenance(r.config_hash, r.spec.preset);
  t.header = {"x", "y", "series"};
  auto add = [&t](double x, const std::optional<double>& y, const char* series) {
    if (y)
      t.rows.push_back({format_number(x), format_number(*y), series});
  };
  for (const auto& row : r.rows) {
    const auto& b = row.noise[0];
    add(row.x, b.D_t, "D_t1");
    add(row.x, b.D_c, "D_c1");
    add(row.x, b.D_a, "D_a1");
    add(row.x, b.lambda_sph, "lambda_sph1");
    add(row.x, b.total_without_csl, "total_no_csl1");
    add(row.x, b.total_with_csl, "total_csl1");
    add(row.x, row.en_off, "E_N_off");
    add(row.x, row.en_on, "E_N_on");
  }
  return t;
}

} // namespace cslprobe

#endif // CSLPROBE_OUTPUT_HPP
