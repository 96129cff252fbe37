#pragma once

// Experiment configuration. A config is JSON; the resolved config is
//   defaults <- preset patch <- user patch
// (RFC 7386 merge patches). Every key must exist in the defaults with a
// matching type, so typos are rejected with the offending field path.

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ltg/errors.hpp"
#include "ltg/measurement.hpp"
#include "ltg/optics.hpp"
#include "ltg/rtn.hpp"
#include "ltg/series.hpp"
#include "ltg/slm.hpp"

namespace ltg::config {

using Json = nlohmann::json;

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"analytic",           "mc-moment",     "transition-delta",
                                              "transition-spectral", "optics-table",  "calibrate-wcp",
                                              "reproduce-figure"};
  return names;
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig3-left", "fig3-right", "fig4-left", "fig4-right",
                                              "figS-calibration"};
  return names;
}

// Keys whose default is null accept a value of the listed type.
inline Json defaults() {
  return Json::parse(R"({
    "command": "analytic",
    "preset": null,
    "seed": 20240611,
    "output_dir": ".",
    "time_grid": {"t_min": 0.0, "t_max": 6.283185307179586, "points": 400},
    "rtn": {"gamma": 0.12, "initial_plus_probability": 0.5},
    "mc": {"m": 4, "realizations": 100000, "antithetic": true},
    "mask": {"pixels_per_half": 320, "pixel_width_m": 1e-4, "j0": 160, "k0": 480},
    "kernel": {"w_cp": 3.0, "w_p": 20.0, "order": 2, "center_offset_j": 0.0, "center_offset_k": 0.0},
    "field": {"n_rep": 3, "balanced": true},
    "sweep": {"deltas": [3, 2, 1, 0], "spectral_widths_nm": [5.0, 10.0, 15.0, 25.0, 40.0],
              "references": false},
    "optics": {"lambda_pump_m": 4.05e-7, "lambda0_m": 8.1e-7, "crystal_length_m": 1e-3,
               "pump_waist_m": 6e-4, "focal_m": 0.2, "theta0_rad": null, "target_wp": 20.0,
               "spectral_width_nm": 15.0, "grid_half_extent_px": 80.0, "grid_spacing_px": 0.25,
               "table_widths_nm": [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0, 60.0],
               "table_path": null},
    "measurement": {"p": 0.927, "N0": 250.0, "acquisition_s": 8.0, "repeats": 4, "shot_noise": true,
                    "n_r": 5, "h_min": -10, "h_max": 9, "true_w_cp": 3.1, "curve_w_min": 0.5,
                    "curve_w_max": 10.0, "curve_samples": 20, "curve_degree": 3}
  })");
}

// Nullable keys and the JSON type they take when set.
inline const std::vector<std::pair<std::string, Json::value_t>>& nullable_keys() {
  static const std::vector<std::pair<std::string, Json::value_t>> keys{
      {"/preset", Json::value_t::string},
      {"/optics/theta0_rad", Json::value_t::number_float},
      {"/optics/table_path", Json::value_t::string}};
  return keys;
}

inline Json preset_patch(const std::string& name) {
  if (name == "fig3-left") {
    return Json::parse(R"({"command": "transition-delta", "rtn": {"gamma": 0.0},
      "kernel": {"w_cp": 3.0, "order": 2, "w_p": 20.0}, "optics": {"spectral_width_nm": 15.0},
      "sweep": {"deltas": [3], "references": true}})");
  }
  if (name == "fig3-right") {
    return Json::parse(R"({"command": "transition-delta", "rtn": {"gamma": 0.0},
      "kernel": {"w_cp": 3.0, "order": 2, "w_p": 20.0}, "optics": {"spectral_width_nm": 15.0},
      "sweep": {"deltas": [0], "references": true}})");
  }
  if (name == "fig4-left") {
    return Json::parse(R"({"command": "transition-delta", "rtn": {"gamma": 0.12},
      "kernel": {"w_cp": 3.0, "order": 2, "w_p": 20.0},
      "sweep": {"deltas": [3, 2, 1, 0], "references": true}})");
  }
  if (name == "fig4-right") {
    return Json::parse(R"({"command": "transition-spectral", "rtn": {"gamma": 0.12},
      "sweep": {"spectral_widths_nm": [5.0, 10.0, 15.0, 25.0, 40.0], "references": true}})");
  }
  if (name == "figS-calibration") {
    return Json::parse(R"({"command": "calibrate-wcp",
      "measurement": {"p": 0.927, "true_w_cp": 3.1, "n_r": 5, "h_min": -10, "h_max": 9,
                      "acquisition_s": 8.0, "repeats": 4, "shot_noise": true},
      "optics": {"spectral_width_nm": 15.0}})");
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
}

namespace detail {

inline std::string type_name(const Json& v) {
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  return v.type_name();
}

inline bool type_matches(const Json& reference, const Json& value) {
  if (reference.is_number_float()) return value.is_number();
  if (reference.is_number_integer()) return value.is_number_integer();
  if (reference.is_boolean()) return value.is_boolean();
  if (reference.is_string()) return value.is_string();
  return reference.type() == value.type();
}

inline void check_against(const Json& reference, const Json& value, const std::string& path) {
  for (const auto& [pt, type] : nullable_keys()) {
    if (pt == path) {
      if (value.is_null()) return;
      const Json probe = type == Json::value_t::string ? Json("") : Json(0.0);
      if (!type_matches(probe, value)) {
        throw ConfigError("config field '" + path + "': expected " + type_name(probe) + " or null, got " +
                          type_name(value));
      }
      return;
    }
  }
  if (reference.is_object()) {
    if (!value.is_object()) throw ConfigError("config field '" + path + "': expected an object");
    for (const auto& [key, v] : value.items()) {
      if (!reference.contains(key)) throw ConfigError("unknown config key '" + path + "/" + key + "'");
      check_against(reference.at(key), v, path + "/" + key);
    }
    return;
  }
  if (reference.is_array()) {
    if (!value.is_array()) throw ConfigError("config field '" + path + "': expected an array");
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (!type_matches(reference.at(0), value[i])) {
        throw ConfigError("config field '" + path + "/" + std::to_string(i) + "': expected " +
                          type_name(reference.at(0)) + ", got " + type_name(value[i]));
      }
    }
    return;
  }
  if (!type_matches(reference, value)) {
    throw ConfigError("config field '" + path + "': expected " + type_name(reference) + ", got " +
                      type_name(value));
  }
}

inline std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

// Applies the schema check to a user patch (a partial config).
inline void check_schema(const Json& patch) {
  if (!patch.is_object()) throw ConfigError("config must be a JSON object");
  detail::check_against(defaults(), patch, "");
}

inline Json parse_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(origin + ": JSON syntax error at " + detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1) +
                      ": " + e.what());
  }
}

inline Json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

// defaults <- preset <- user; an explicit preset argument wins over the
// preset named inside the user config.
inline Json resolve(const Json& user, const std::optional<std::string>& preset_override = std::nullopt) {
  check_schema(user);
  Json resolved = defaults();
  std::optional<std::string> preset = preset_override;
  if (!preset && user.contains("preset") && user.at("preset").is_string()) {
    preset = user.at("preset").get<std::string>();
  }
  if (preset) {
    resolved.merge_patch(preset_patch(*preset));
    resolved["command"] = "reproduce-figure";
  }
  Json patch = user;
  patch.erase("preset");
  resolved.merge_patch(patch);
  if (preset) {
    // The merge patch treats null as deletion; restore the nullable slots.
    resolved["preset"] = *preset;
  }
  for (const auto& [pt, type] : nullable_keys()) {
    const Json::json_pointer ptr(pt);
    if (!resolved.contains(ptr)) resolved[ptr] = nullptr;
  }
  check_schema(resolved);
  const std::string command = resolved.at("command").get<std::string>();
  bool known = false;
  for (const auto& c : command_names()) known = known || c == command;
  if (!known) throw ConfigError("config field '/command': unknown command '" + command + "'");
  if (command == "reproduce-figure" && resolved.at("preset").is_null()) {
    throw ConfigError("command reproduce-figure needs a preset");
  }
  return resolved;
}

// The experiment a resolved config actually runs.
inline std::string effective_command(const Json& resolved) {
  const std::string command = resolved.at("command").get<std::string>();
  if (command != "reproduce-figure") return command;
  return preset_patch(resolved.at("preset").get<std::string>()).at("command").get<std::string>();
}

// Typed view of a resolved config.
struct ExperimentConfig {
  std::string command;
  std::string effective_command;
  std::optional<std::string> preset;
  std::uint64_t seed = 0;
  std::string output_dir;
  std::vector<double> times;
  rtn::RtnParams rtn;
  int mc_m = 4;
  std::size_t mc_realizations = 0;
  bool mc_antithetic = true;
  slm::KernelParams kernel;
  int n_rep = 3;
  bool balanced = true;
  std::vector<int> deltas;
  std::vector<double> spectral_widths_nm;
  bool references = false;
  optics::PdcSetup pdc;
  optics::ProfileGrid grid;
  double target_wp = optics::kTargetWp;
  std::vector<double> table_widths_nm;
  std::optional<std::string> table_path;
  measurement::CalibrationSettings calibration;
  Json resolved;
};

inline ExperimentConfig typed(const Json& r) {
  ExperimentConfig c;
  c.resolved = r;
  c.command = r.at("command").get<std::string>();
  c.effective_command = effective_command(r);
  if (r.at("preset").is_string()) c.preset = r.at("preset").get<std::string>();
  if (!r.at("seed").is_number_unsigned()) throw ConfigError("config field '/seed': must be >= 0");
  c.seed = r.at("seed").get<std::uint64_t>();
  c.output_dir = r.at("output_dir").get<std::string>();

  const Json& tg = r.at("time_grid");
  const auto points = tg.at("points").get<long long>();
  if (points < 1) throw ConfigError("config field '/time_grid/points': must be >= 1");
  const double t_min = tg.at("t_min").get<double>();
  const double t_max = tg.at("t_max").get<double>();
  if (!(t_min >= 0.0) || !(t_max >= t_min)) {
    throw ConfigError("config field '/time_grid': need 0 <= t_min <= t_max");
  }
  c.times = linspace(t_min, t_max, static_cast<std::size_t>(points));

  c.rtn.gamma = r.at("/rtn/gamma"_json_pointer).get<double>();
  c.rtn.initial_plus_probability = r.at("/rtn/initial_plus_probability"_json_pointer).get<double>();
  c.rtn.t_max = t_max > 0.0 ? t_max : 1.0;

  c.mc_m = r.at("/mc/m"_json_pointer).get<int>();
  const auto n_real = r.at("/mc/realizations"_json_pointer).get<long long>();
  if (n_real < 0) throw ConfigError("config field '/mc/realizations': must be >= 0");
  c.mc_realizations = static_cast<std::size_t>(n_real);
  c.mc_antithetic = r.at("/mc/antithetic"_json_pointer).get<bool>();

  const Json& mask = r.at("mask");
  c.kernel.geometry.pixels_per_half = mask.at("pixels_per_half").get<int>();
  c.kernel.geometry.pixel_width_m = mask.at("pixel_width_m").get<double>();
  c.kernel.geometry.j0 = mask.at("j0").get<int>();
  c.kernel.geometry.k0 = mask.at("k0").get<int>();
  const Json& k = r.at("kernel");
  c.kernel.w_cp = k.at("w_cp").get<double>();
  c.kernel.w_p = k.at("w_p").get<double>();
  c.kernel.order = k.at("order").get<int>();
  c.kernel.center_offset_j = k.at("center_offset_j").get<double>();
  c.kernel.center_offset_k = k.at("center_offset_k").get<double>();

  c.n_rep = r.at("/field/n_rep"_json_pointer).get<int>();
  c.balanced = r.at("/field/balanced"_json_pointer).get<bool>();
  c.deltas = r.at("/sweep/deltas"_json_pointer).get<std::vector<int>>();
  c.spectral_widths_nm = r.at("/sweep/spectral_widths_nm"_json_pointer).get<std::vector<double>>();
  c.references = r.at("/sweep/references"_json_pointer).get<bool>();

  const Json& o = r.at("optics");
  c.pdc.lambda_pump_m = o.at("lambda_pump_m").get<double>();
  c.pdc.lambda0_m = o.at("lambda0_m").get<double>();
  c.pdc.crystal_length_m = o.at("crystal_length_m").get<double>();
  c.pdc.pump_waist_m = o.at("pump_waist_m").get<double>();
  c.pdc.focal_m = o.at("focal_m").get<double>();
  if (o.at("theta0_rad").is_number()) c.pdc.theta0_rad = o.at("theta0_rad").get<double>();
  c.pdc.pixel_width_m = c.kernel.geometry.pixel_width_m;
  c.pdc.spectral_width_nm = o.at("spectral_width_nm").get<double>();
  c.target_wp = o.at("target_wp").get<double>();
  c.grid.half_extent_px = o.at("grid_half_extent_px").get<double>();
  c.grid.spacing_px = o.at("grid_spacing_px").get<double>();
  c.table_widths_nm = o.at("table_widths_nm").get<std::vector<double>>();
  if (o.at("table_path").is_string()) c.table_path = o.at("table_path").get<std::string>();

  const Json& m = r.at("measurement");
  auto& cal = c.calibration;
  cal.kernel = c.kernel;
  cal.kernel.w_cp = m.at("true_w_cp").get<double>();
  cal.n_r = m.at("n_r").get<int>();
  cal.h_min = m.at("h_min").get<int>();
  cal.h_max = m.at("h_max").get<int>();
  cal.p = m.at("p").get<double>();
  cal.counts.N0 = m.at("N0").get<double>();
  cal.counts.acquisition_s = m.at("acquisition_s").get<double>();
  cal.counts.repeats = m.at("repeats").get<int>();
  cal.counts.shot_noise = m.at("shot_noise").get<bool>();
  cal.curve_w_min = m.at("curve_w_min").get<double>();
  cal.curve_w_max = m.at("curve_w_max").get<double>();
  cal.curve_samples = m.at("curve_samples").get<int>();
  cal.curve_degree = m.at("curve_degree").get<int>();
  return c;
}

// Range of spectral widths the optics table covers.
struct SpectralRange {
  double lo = 0.0;
  double hi = 0.0;
};

inline SpectralRange table_range(const ExperimentConfig& c) {
  if (c.table_path) {
    const WcpTable t = read_wcp_table(*c.table_path);
    if (t.empty()) throw ConfigError("optics table '" + *c.table_path + "' has no rows");
    return {t.min_dlambda(), t.max_dlambda()};
  }
  if (c.table_widths_nm.empty()) throw ConfigError("config field '/optics/table_widths_nm': empty");
  const auto [lo, hi] = std::minmax_element(c.table_widths_nm.begin(), c.table_widths_nm.end());
  return {*lo, *hi};
}

inline void check_spectral_width(double dl, const SpectralRange& range, const std::string& field) {
  if (dl < range.lo || dl > range.hi) {
    std::ostringstream msg;
    msg << "config field '" << field << "': spectral width " << dl
        << " nm lies outside the calibrated optics range [" << range.lo << ", " << range.hi << "] nm";
    throw RangeError(msg.str());
  }
}

// Every range and consistency check that does not require running an
// experiment. Returns one message per problem (empty when valid).
inline std::vector<std::string> diagnostics(const ExperimentConfig& c) {
  std::vector<std::string> out;
  auto check = [&out](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      out.emplace_back(e.what());
    }
  };
  const std::string& cmd = c.effective_command;
  check([&] { require_time_grid(c.times); });
  check([&] {
    rtn::RtnParams p = c.rtn;
    p.validate();
  });
  if (cmd == "mc-moment") {
    check([&] {
      if (c.mc_m < 1) throw ParameterError("config field '/mc/m': moment order must be >= 1");
      if (c.mc_realizations < 2) throw ParameterError("config field '/mc/realizations': need >= 2");
      if (c.mc_antithetic && c.mc_realizations % 2 != 0) {
        throw ParameterError("config field '/mc/realizations': antithetic pairing needs an even count");
      }
    });
  }
  const bool uses_kernel = cmd == "transition-delta" || cmd == "transition-spectral" || cmd == "calibrate-wcp";
  if (uses_kernel) {
    check([&] { c.kernel.validate(); });
    check([&] {
      if (c.n_rep < 1 || c.n_rep > c.kernel.geometry.pixels_per_half) {
        throw ParameterError("config field '/field/n_rep': must lie in [1, pixels_per_half]");
      }
    });
  }
  if (cmd == "transition-delta") {
    for (std::size_t i = 0; i < c.deltas.size(); ++i) {
      check([&] {
        if (std::abs(c.deltas[i]) >= c.kernel.geometry.pixels_per_half) {
          throw RangeError("config field '/sweep/deltas/" + std::to_string(i) + "': delta = " +
                           std::to_string(c.deltas[i]) + " shifts the field off the mask (|delta| < " +
                           std::to_string(c.kernel.geometry.pixels_per_half) + ")");
        }
      });
    }
  }
  const bool uses_optics = cmd == "transition-spectral" || cmd == "optics-table";
  if (uses_optics || cmd == "calibrate-wcp" || cmd == "transition-delta") {
    check([&] {
      optics::PdcSetup s = c.pdc;
      s.validate();
      c.grid.validate();
    });
  }
  if (uses_optics || cmd == "transition-delta" || cmd == "calibrate-wcp") {
    check([&] {
      const SpectralRange range = table_range(c);
      check_spectral_width(c.pdc.spectral_width_nm, range, "/optics/spectral_width_nm");
      if (cmd == "transition-spectral") {
        for (std::size_t i = 0; i < c.spectral_widths_nm.size(); ++i) {
          check_spectral_width(c.spectral_widths_nm[i], range, "/sweep/spectral_widths_nm/" + std::to_string(i));
        }
      }
    });
  }
  if (cmd == "optics-table") {
    for (std::size_t i = 0; i < c.table_widths_nm.size(); ++i) {
      check([&] {
        if (!(c.table_widths_nm[i] >= 0.0)) {
          throw ParameterError("config field '/optics/table_widths_nm/" + std::to_string(i) + "': must be >= 0");
        }
      });
    }
  }
  if (cmd == "calibrate-wcp") check([&] { c.calibration.validate(); });
  return out;
}

inline ExperimentConfig load(const Json& user, const std::optional<std::string>& preset = std::nullopt) {
  return typed(resolve(user, preset));
}

}  // namespace ltg::config
