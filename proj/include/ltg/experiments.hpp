#pragma once

// Runs one resolved experiment config and returns its result tables.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ltg/analytic.hpp"
#include "ltg/config.hpp"
#include "ltg/measurement.hpp"
#include "ltg/optics.hpp"
#include "ltg/rtn.hpp"
#include "ltg/slm.hpp"
#include "ltg/wcp_table.hpp"

namespace ltg::experiments {

using Cell = std::variant<double, std::int64_t, std::string>;

struct ResultTable {
  std::string name;  // empty for the primary table
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct RunResult {
  std::vector<ResultTable> tables;
  // Resolved config with values fixed during the run (calibrated theta0).
  config::Json resolved;
};

// Seed streams per use; realizations and pixels index substreams.
inline constexpr std::uint64_t kMonteCarloStream = 1;
inline constexpr std::uint64_t kFieldStream = 2;
inline constexpr std::uint64_t kCountStream = 3;

inline const std::vector<std::string>& coherence_columns() {
  static const std::vector<std::string> c{"series", "t", "re", "im", "abs", "entanglement"};
  return c;
}

inline void append_series(ResultTable& table, const std::string& label, const CoherenceSeries& s,
                          bool with_error) {
  const std::vector<double> e = analytic::entanglement(s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::vector<Cell> row{label, s.times[i], s.values[i].real(), s.values[i].imag(), std::abs(s.values[i]), e[i]};
    if (with_error) {
      row.emplace_back(s.std_error_re[i]);
      row.emplace_back(s.std_error_im[i]);
    }
    table.rows.push_back(std::move(row));
  }
}

inline std::string number_label(double v) {
  std::string s = std::to_string(v);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

inline void append_references(ResultTable& table, const config::ExperimentConfig& c) {
  append_series(table, "LE", analytic::gamma_le(c.rtn.gamma, c.times), false);
  append_series(table, "GE", analytic::gamma_ge(c.rtn.gamma, c.times), false);
}

inline slm::FieldSettings field_settings(const config::ExperimentConfig& c) {
  slm::FieldSettings f;
  f.gamma = c.rtn.gamma;
  f.n_rep = c.n_rep;
  f.balanced = c.balanced;
  f.initial_plus_probability = c.rtn.initial_plus_probability;
  f.times = c.times;
  f.seed = SeedSpec{c.seed, kFieldStream, 0};
  return f;
}

inline ResultTable optics_table_rows(const WcpTable& table) {
  ResultTable t;
  t.columns = {"dlambda_nm", "w_p", "w_tilde_cp", "order", "w0_cp", "w_cp"};
  for (const WcpRow& r : table.rows()) {
    t.rows.push_back({r.dlambda_nm, r.w_p, r.w_tilde_cp, static_cast<std::int64_t>(r.order), r.w0_cp, r.w_cp});
  }
  return t;
}

// Optics table for a config: read from disk, or computed with theta0
// calibrated (at the configured spectral width) when unset.
inline WcpTable optics_table(config::ExperimentConfig& c, config::Json& resolved) {
  if (c.table_path) return read_wcp_table(*c.table_path);
  if (!c.pdc.theta0_rad) {
    c.pdc.theta0_rad = optics::calibrate_theta0(c.pdc, c.grid, c.target_wp);
    resolved["optics"]["theta0_rad"] = *c.pdc.theta0_rad;
  }
  return optics::wcp_curve(c.pdc, c.table_widths_nm, c.grid);
}

inline RunResult run(config::ExperimentConfig c) {
  const std::vector<std::string> problems = config::diagnostics(c);
  if (!problems.empty()) throw ConfigError(problems.front());

  RunResult out;
  out.resolved = c.resolved;
  const std::string& cmd = c.effective_command;

  if (cmd == "analytic") {
    ResultTable t{"", coherence_columns(), {}};
    append_references(t, c);
    out.tables.push_back(std::move(t));
  } else if (cmd == "mc-moment") {
    ResultTable t{"", coherence_columns(), {}};
    t.columns.push_back("se_re");
    t.columns.push_back("se_im");
    const CoherenceSeries s = rtn::mc_exponential_moment(c.rtn, c.mc_m, c.times, c.mc_realizations,
                                                         SeedSpec{c.seed, kMonteCarloStream, 0}, c.mc_antithetic);
    append_series(t, "m=" + std::to_string(c.mc_m), s, true);
    out.tables.push_back(std::move(t));
  } else if (cmd == "transition-delta") {
    ResultTable t{"", coherence_columns(), {}};
    if (c.references && !c.deltas.empty()) append_references(t, c);
    const auto sweep = slm::transition_sweep_delta(field_settings(c), c.deltas, c.kernel);
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      append_series(t, "delta=" + std::to_string(c.deltas[i]), sweep[i], false);
    }
    out.tables.push_back(std::move(t));
  } else if (cmd == "transition-spectral") {
    ResultTable t{"", coherence_columns(), {}};
    if (c.spectral_widths_nm.empty()) {
      out.tables.push_back(std::move(t));
      return out;
    }
    const WcpTable table = optics_table(c, out.resolved);
    if (c.references) append_references(t, c);
    const auto sweep = slm::transition_sweep_spectral(field_settings(c), c.spectral_widths_nm, table, c.kernel);
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      append_series(t, "dlambda_nm=" + number_label(c.spectral_widths_nm[i]), sweep[i], false);
    }
    out.tables.push_back(std::move(t));
    ResultTable ot = optics_table_rows(table);
    ot.name = "optics";
    out.tables.push_back(std::move(ot));
  } else if (cmd == "optics-table") {
    if (c.table_widths_nm.empty()) {
      out.tables.push_back(optics_table_rows(WcpTable{}));
      return out;
    }
    out.tables.push_back(optics_table_rows(optics_table(c, out.resolved)));
  } else if (cmd == "calibrate-wcp") {
    measurement::CalibrationSettings s = c.calibration;
    s.seed = SeedSpec{c.seed, kCountStream, 0};
    const measurement::CalibrationResult r = measurement::calibrate_wcp(s);
    ResultTable vh{"", {"h", "V", "N_pp", "N_pm"}, {}};
    for (std::size_t i = 0; i < r.h_values.size(); ++i) {
      vh.rows.push_back({static_cast<std::int64_t>(r.h_values[i]), r.V_of_h[i], r.counts[i].N_pp, r.counts[i].N_pm});
    }
    ResultTable curve{"curve", {"w_cp", "vis", "vis_fit"}, {}};
    for (std::size_t i = 0; i < r.curve.w_cp.size(); ++i) {
      curve.rows.push_back({r.curve.w_cp[i], r.curve.vis[i], r.curve.polynomial(r.curve.w_cp[i])});
    }
    ResultTable summary{"summary", {"quantity", "value"}, {}};
    summary.rows = {{std::string("fitted_offset"), r.fitted_offset},
                    {std::string("fitted_amplitude"), r.fitted_amplitude},
                    {std::string("vis_of_V"), r.vis_of_V},
                    {std::string("vis_std_error"), r.vis_std_error},
                    {std::string("w_cp_estimate"), r.w_cp_estimate},
                    {std::string("w_cp_uncertainty"), r.w_cp_uncertainty},
                    {std::string("true_w_cp"), s.kernel.w_cp},
                    {std::string("p"), s.p}};
    out.tables.push_back(std::move(vh));
    out.tables.push_back(std::move(curve));
    out.tables.push_back(std::move(summary));
  } else {
    throw ConfigError("unknown command '" + cmd + "'");
  }
  return out;
}

}  // namespace ltg::experiments
