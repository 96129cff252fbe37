#pragma once

// Table of correlated-pixel widths versus PDC spectral width. Produced by the
// optics model, consumed by spectral transition sweeps, and exchanged on disk
// as comma-separated text with '#' comment lines.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ltg/errors.hpp"

namespace ltg {

struct WcpRow {
  double dlambda_nm = 0.0;
  double w_p = 0.0;         // PDC width, pixels
  double w_tilde_cp = 0.0;  // width of F(dx1, 0), pixels
  int order = 2;            // preferred super-Gaussian order
  double w0_cp = 0.0;       // pump-limited floor, pixels
  double w_cp = 0.0;        // quadrature sum of the two, pixels
};

struct WcpLookup {
  double w_cp = 0.0;
  int order = 2;
};

class WcpTable {
 public:
  WcpTable() = default;
  explicit WcpTable(std::vector<WcpRow> rows) : rows_(std::move(rows)) {
    std::stable_sort(rows_.begin(), rows_.end(),
                     [](const WcpRow& a, const WcpRow& b) { return a.dlambda_nm < b.dlambda_nm; });
  }

  [[nodiscard]] const std::vector<WcpRow>& rows() const { return rows_; }
  [[nodiscard]] bool empty() const { return rows_.empty(); }
  [[nodiscard]] double min_dlambda() const { return rows_.front().dlambda_nm; }
  [[nodiscard]] double max_dlambda() const { return rows_.back().dlambda_nm; }

  [[nodiscard]] bool contains(double dlambda_nm) const {
    return !rows_.empty() && dlambda_nm >= min_dlambda() && dlambda_nm <= max_dlambda();
  }

  // Exact rows are returned as stored; between rows w_cp is interpolated
  // linearly and the order is taken from the nearer row.
  [[nodiscard]] WcpLookup lookup(double dlambda_nm) const {
    if (!contains(dlambda_nm)) {
      std::ostringstream msg;
      msg << "spectral width " << dlambda_nm << " nm lies outside the calibrated optics range";
      if (!rows_.empty()) msg << " [" << min_dlambda() << ", " << max_dlambda() << "] nm";
      throw RangeError(msg.str());
    }
    auto hi = std::lower_bound(rows_.begin(), rows_.end(), dlambda_nm,
                               [](const WcpRow& r, double x) { return r.dlambda_nm < x; });
    if (hi->dlambda_nm == dlambda_nm) return {hi->w_cp, hi->order};
    auto lo = hi - 1;
    const double u = (dlambda_nm - lo->dlambda_nm) / (hi->dlambda_nm - lo->dlambda_nm);
    return {lo->w_cp + u * (hi->w_cp - lo->w_cp), u <= 0.5 ? lo->order : hi->order};
  }

 private:
  std::vector<WcpRow> rows_;
};

inline constexpr const char* kWcpTableHeader = "dlambda_nm,w_p,w_tilde_cp,order,w0_cp,w_cp";

inline WcpTable read_wcp_table(std::istream& in) {
  std::string line;
  bool header_seen = false;
  std::vector<WcpRow> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kWcpTableHeader) {
        throw IoError("w_cp table line " + std::to_string(line_no) + ": expected header '" +
                      kWcpTableHeader + "'");
      }
      header_seen = true;
      continue;
    }
    std::istringstream fields(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(fields, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("w_cp table line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (v.size() != 6) {
      throw IoError("w_cp table line " + std::to_string(line_no) + ": expected 6 columns");
    }
    rows.push_back({v[0], v[1], v[2], static_cast<int>(std::lround(v[3])), v[4], v[5]});
  }
  if (!header_seen) throw IoError("w_cp table: missing header");
  return WcpTable(std::move(rows));
}

inline WcpTable read_wcp_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open w_cp table '" + path + "'");
  return read_wcp_table(in);
}

}  // namespace ltg
