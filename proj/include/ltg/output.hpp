#pragma once

// CSV output: '#'-prefixed metadata lines (including the full resolved
// config and seed), then a header line and the data rows. Numbers use the
// shortest representation that round-trips.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ltg/config.hpp"
#include "ltg/errors.hpp"
#include "ltg/experiments.hpp"
#include "ltg/random.hpp"

namespace ltg::output {

inline constexpr const char* kFormatLine = "# ltg-output 1";
inline constexpr const char* kConfigPrefix = "# config: ";

inline std::string format_number(double v) {
  if (!std::isfinite(v)) throw NumericalError("output: non-finite value in result table");
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_cell(const experiments::Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_number(*d);
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  return std::get<std::string>(cell);
}

inline std::string join_numbers(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ";") + format_number(x);
  return s;
}

// Named parameters for quick inspection; the config line is authoritative.
inline std::string params_line(const config::ExperimentConfig& c) {
  std::ostringstream p;
  const bool calib = c.effective_command == "calibrate-wcp";
  p << "# params: gamma=" << format_number(c.rtn.gamma);
  if (c.effective_command == "transition-delta") {
    std::string d;
    for (int x : c.deltas) d += (d.empty() ? "" : ";") + std::to_string(x);
    p << " delta=" << d;
  }
  if (c.effective_command == "transition-spectral") {
    p << " dlambda_nm=" << join_numbers(c.spectral_widths_nm);
  } else {
    p << " dlambda_nm=" << format_number(c.pdc.spectral_width_nm);
  }
  p << " w_cp=" << format_number(calib ? c.calibration.kernel.w_cp : c.kernel.w_cp)
    << " n=" << c.kernel.order << " n_rep=" << c.n_rep << " p=" << format_number(c.calibration.p)
    << " seed=" << c.seed;
  return p.str();
}

inline void write_table(std::ostream& out, const config::ExperimentConfig& c, const config::Json& resolved,
                        const experiments::ResultTable& table) {
  out << kFormatLine << '\n';
  out << "# command: " << c.command << '\n';
  if (c.preset) out << "# preset: " << *c.preset << '\n';
  out << "# experiment: " << c.effective_command << '\n';
  if (!table.name.empty()) out << "# table: " << table.name << '\n';
  out << "# master_seed: " << c.seed << '\n';
  out << "# rng: " << kRngAlgorithm << " v" << kRngAlgorithmVersion << '\n';
  out << params_line(c) << '\n';
  out << kConfigPrefix << resolved.dump() << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw StructuralError("output: row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
    out << '\n';
  }
}

inline std::string file_stem(const config::ExperimentConfig& c) { return c.preset ? *c.preset : c.command; }

inline std::vector<std::filesystem::path> write_run(const experiments::RunResult& result,
                                                    const config::ExperimentConfig& c,
                                                    const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> paths;
  for (const auto& table : result.tables) {
    const std::string name = file_stem(c) + (table.name.empty() ? "" : "_" + table.name) + ".csv";
    const std::filesystem::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_table(out, c, result.resolved, table);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
    paths.push_back(path);
  }
  return paths;
}

// Everything after the metadata block.
inline std::string data_section(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::string out;
  bool in_data = false;
  while (std::getline(in, line)) {
    if (!in_data && !line.empty() && line[0] == '#') continue;
    in_data = true;
    out += line;
    out += '\n';
  }
  return out;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Resolved config embedded in an output file.
inline config::Json read_embedded_config(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind(kConfigPrefix, 0) == 0) {
      return config::parse_text(line.substr(std::string(kConfigPrefix).size()),
                                path.string() + " line " + std::to_string(line_no));
    }
    if (line.empty() || line[0] != '#') break;
  }
  throw IoError("'" + path.string() + "' has no embedded config line");
}

}  // namespace ltg::output
