#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "ltg/errors.hpp"

namespace ltg {

using Complex = std::complex<double>;

enum class Provenance { analytic, monte_carlo, kernel_sum };

constexpr std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::analytic: return "analytic";
    case Provenance::monte_carlo: return "monte_carlo";
    case Provenance::kernel_sum: return "kernel_sum";
  }
  return "unknown";
}

// Complex coherence factor sampled on an ascending time grid. Standard
// errors are filled by Monte Carlo producers only.
struct CoherenceSeries {
  std::vector<double> times;
  std::vector<Complex> values;
  Provenance provenance = Provenance::analytic;
  std::map<std::string, double> params;
  std::vector<double> std_error_re;
  std::vector<double> std_error_im;

  [[nodiscard]] std::size_t size() const { return times.size(); }
  [[nodiscard]] bool has_std_error() const { return !std_error_re.empty(); }
};

// n equally spaced points on [t_min, t_max], endpoints included.
inline std::vector<double> linspace(double t_min, double t_max, std::size_t n) {
  std::vector<double> grid(n);
  if (n == 1) {
    grid[0] = t_min;
    return grid;
  }
  const double step = (t_max - t_min) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) grid[i] = t_min + step * static_cast<double>(i);
  if (n > 1) grid.back() = t_max;
  return grid;
}

inline std::vector<double> default_time_grid() {
  return linspace(0.0, 2.0 * std::numbers::pi, 400);
}

inline void require_time_grid(const std::vector<double>& times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0)) throw RangeError("time grid must start at t >= 0");
    if (i > 0 && !(times[i] >= times[i - 1])) {
      throw RangeError("time grid must be ascending");
    }
  }
}

}  // namespace ltg
