#pragma once

// Closed-form RTN coherence factors. These are the exact references for
// every Monte Carlo and kernel-sum estimate in the library.

#include <cmath>
#include <complex>
#include <vector>

#include "ltg/errors.hpp"
#include "ltg/series.hpp"

namespace ltg::analytic {

// |gamma - m| below this uses the critically damped limit.
inline constexpr double kDegenerateBranchTolerance = 1e-9;

// <exp(i m phi(t))> = e^{-gamma t} (cosh(d t) + gamma/d sinh(d t)),
// d = sqrt(gamma^2 - m^2). Always real.
inline double exp_moment(double gamma, int m, double t) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw ParameterError("exp_moment: gamma must be finite and >= 0");
  }
  if (m < 1) throw ParameterError("exp_moment: moment order m must be >= 1");
  if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("exp_moment: t must be finite and >= 0");
  const double mm = static_cast<double>(m);

  if (std::abs(gamma - mm) < kDegenerateBranchTolerance) {
    return std::exp(-gamma * t) * (1.0 + gamma * t);
  }
  if (gamma > mm) {
    // Overdamped. Written with decaying exponentials only so that large
    // gamma*t neither overflows nor cancels.
    const double d = std::sqrt((gamma - mm) * (gamma + mm));
    const double slow = std::exp((d - gamma) * t);
    const double cosh_part = 0.5 * (slow + std::exp(-(d + gamma) * t));
    const double sinh_part = -0.5 * slow * std::expm1(-2.0 * d * t);
    return cosh_part + (gamma / d) * sinh_part;
  }
  // Underdamped: d = i w.
  const double w = std::sqrt((mm - gamma) * (mm + gamma));
  return std::exp(-gamma * t) * (std::cos(w * t) + (gamma / w) * std::sin(w * t));
}

namespace detail {

inline CoherenceSeries moment_series(double gamma, int m, const std::vector<double>& times,
                                     bool square) {
  require_time_grid(times);
  CoherenceSeries out;
  out.times = times;
  out.provenance = Provenance::analytic;
  out.params = {{"gamma", gamma}, {"m", static_cast<double>(m)}};
  out.values.reserve(times.size());
  for (double t : times) {
    const double v = exp_moment(gamma, m, t);
    out.values.emplace_back(square ? v * v : v, 0.0);
  }
  return out;
}

}  // namespace detail

// Local environments: Gamma_LE(t) = <exp(2 i phi)>^2.
inline CoherenceSeries gamma_le(double gamma, const std::vector<double>& times) {
  return detail::moment_series(gamma, 2, times, true);
}

// Global environment: Gamma_GE(t) = <exp(4 i phi)>.
inline CoherenceSeries gamma_ge(double gamma, const std::vector<double>& times) {
  return detail::moment_series(gamma, 4, times, false);
}

// Two-qubit entanglement E(t) = |Gamma(t)|.
inline std::vector<double> entanglement(const CoherenceSeries& series) {
  std::vector<double> e;
  e.reserve(series.values.size());
  for (const Complex& g : series.values) e.push_back(std::abs(g));
  return e;
}

}  // namespace ltg::analytic
