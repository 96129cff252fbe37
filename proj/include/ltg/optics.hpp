#pragma once

// Two-photon spatial correlations behind the SLM. To first order in angle
// and frequency the joint angular profile is
//   F(th1, th2) = int dw |A~(dk_perp) Sinc(dk_par L / 2)|^2,
//   dk_par  = -k_p theta0 (th1 + th2) / 2,
//   dk_perp =  k_p (th1 - th2) / 2 + 2 theta0 w / c,
// with a Gaussian pump of waist w_pump, |A~(q)|^2 = exp(-q^2 w_pump^2 / 2),
// and a rectangular spectral window of full width d_lambda around
// degeneracy. The lens maps angles to SLM coordinates, dx = f theta, and all
// widths are reported in pixels.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ltg/errors.hpp"
#include "ltg/fitting.hpp"
#include "ltg/wcp_table.hpp"

namespace ltg::optics {

struct PdcSetup {
  double lambda_pump_m = 405e-9;
  double lambda0_m = 810e-9;
  double crystal_length_m = 1e-3;
  double pump_waist_m = 0.6e-3;
  double focal_m = 0.2;
  // PDC central angle. Not fixed by the apparatus description; obtain it
  // with calibrate_theta0 when unset.
  std::optional<double> theta0_rad;
  double pixel_width_m = 100e-6;
  double spectral_width_nm = 15.0;

  void validate() const {
    for (double v : {lambda_pump_m, lambda0_m, crystal_length_m, pump_waist_m, focal_m, pixel_width_m}) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError("pdc setup: lengths must be > 0");
    }
    if (!(spectral_width_nm >= 0.0) || !std::isfinite(spectral_width_nm)) {
      throw ParameterError("pdc setup: spectral width must be >= 0");
    }
    if (theta0_rad && (!(*theta0_rad > 0.0) || !std::isfinite(*theta0_rad))) {
      throw ParameterError("pdc setup: theta0 must be > 0");
    }
  }

  [[nodiscard]] double theta0() const {
    if (!theta0_rad) {
      throw ParameterError("pdc setup: theta0 is unset; calibrate it against w_p first");
    }
    return *theta0_rad;
  }

  [[nodiscard]] double pump_wavenumber() const { return 2.0 * std::numbers::pi / lambda_pump_m; }
  [[nodiscard]] double angle_per_pixel() const { return pixel_width_m / focal_m; }
};

// Symmetric square grid dx in [-half_extent, half_extent] on both axes.
struct ProfileGrid {
  double half_extent_px = 80.0;
  double spacing_px = 0.25;

  void validate() const {
    if (!(spacing_px > 0.0) || !(half_extent_px > spacing_px)) {
      throw ParameterError("profile grid: need 0 < spacing < half extent");
    }
    const double steps = half_extent_px / spacing_px;
    if (std::abs(steps - std::round(steps)) > 1e-9) {
      throw ParameterError("profile grid: half extent must be a multiple of the spacing");
    }
  }
  [[nodiscard]] int half_points() const { return static_cast<int>(std::lround(half_extent_px / spacing_px)); }
  [[nodiscard]] int points() const { return 2 * half_points() + 1; }
  [[nodiscard]] double coordinate(int i) const { return (i - half_points()) * spacing_px; }
};

class JointSpatialProfile {
 public:
  JointSpatialProfile(ProfileGrid grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    const auto n = static_cast<std::size_t>(grid_.points());
    if (values_.size() != n * n) throw StructuralError("joint profile: value count does not match grid");
  }

  // Samples a callable F(dx1, dx2) on the grid.
  static JointSpatialProfile sample(const ProfileGrid& grid,
                                    const std::function<double(double, double)>& f) {
    grid.validate();
    const int n = grid.points();
    std::vector<double> v(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(i) * n + k] = f(grid.coordinate(i), grid.coordinate(k));
    }
    return JointSpatialProfile(grid, std::move(v));
  }

  [[nodiscard]] const ProfileGrid& grid() const { return grid_; }
  [[nodiscard]] int points() const { return grid_.points(); }
  [[nodiscard]] double at(int i1, int i2) const {
    return values_[static_cast<std::size_t>(i1) * points() + i2];
  }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }

  [[nodiscard]] JointSpatialProfile scaled(double factor) const {
    std::vector<double> v = values_;
    for (double& x : v) x *= factor;
    return JointSpatialProfile(grid_, std::move(v));
  }

 private:
  ProfileGrid grid_;
  std::vector<double> values_;
};

// Spectral half-width of the window in angular wavenumber, w/c.
inline double spectral_half_width(const PdcSetup& s) {
  return std::numbers::pi * s.spectral_width_nm * 1e-9 / (s.lambda0_m * s.lambda0_m);
}

inline constexpr double kQuadratureTolerance = 1e-6;

// Window-averaged pump factor as a function of dx1 - dx2 (pixels).
inline double pump_factor(const PdcSetup& s, double difference_px) {
  const double a = 0.5 * s.pump_wavenumber() * difference_px * s.angle_per_pixel();
  const double w2 = s.pump_waist_m * s.pump_waist_m;
  const double nu_h = spectral_half_width(s);
  if (nu_h == 0.0) return std::exp(-0.5 * a * a * w2);

  // Change variable to q = a + 2 theta0 nu, split at the Gaussian peak.
  const double theta0 = s.theta0();
  const double q_lo = a - 2.0 * theta0 * nu_h;
  const double q_hi = a + 2.0 * theta0 * nu_h;
  auto integrand = [w2](double q) { return std::exp(-0.5 * q * q * w2); };
  using Integrator = boost::math::quadrature::gauss_kronrod<double, 31>;
  double total = 0.0;
  auto piece = [&](double lo, double hi) {
    double err = 0.0;
    const double value = Integrator::integrate(integrand, lo, hi, 20, 1e-12, &err);
    if (err > kQuadratureTolerance * std::abs(value) && err > 1e-300) {
      throw NumericalError("joint profile: spectral quadrature did not converge (relative error " +
                           std::to_string(err / std::abs(value)) + ")");
    }
    total += value;
  };
  if (q_lo < 0.0 && q_hi > 0.0) {
    piece(q_lo, 0.0);
    piece(0.0, q_hi);
  } else {
    piece(q_lo, q_hi);
  }
  return total / (q_hi - q_lo);
}

// Longitudinal phase-matching factor Sinc^2 as a function of dx1 + dx2.
inline double phase_matching_factor(const PdcSetup& s, double sum_px) {
  const double x = 0.25 * s.pump_wavenumber() * s.theta0() * sum_px * s.angle_per_pixel() *
                   s.crystal_length_m;
  if (x == 0.0) return 1.0;
  const double sinc = std::sin(x) / x;
  return sinc * sinc;
}

// F factorizes into a function of dx1 - dx2 times a function of dx1 + dx2;
// on the uniform grid both are tabulated on 2n - 1 points.
inline JointSpatialProfile joint_profile(const PdcSetup& setup, const ProfileGrid& grid = {}) {
  setup.validate();
  grid.validate();
  (void)setup.theta0();
  const int n = grid.points();
  const int c = grid.half_points();
  std::vector<double> diff(2 * n - 1);
  std::vector<double> sum(2 * n - 1);
  for (int d = -(n - 1); d <= n - 1; ++d) {
    diff[d + n - 1] = pump_factor(setup, d * grid.spacing_px);
  }
  for (int m = 0; m <= 2 * (n - 1); ++m) {
    sum[m] = phase_matching_factor(setup, (m - 2 * c) * grid.spacing_px);
  }
  std::vector<double> v(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      v[static_cast<std::size_t>(i) * n + k] = diff[i - k + n - 1] * sum[i + k];
    }
  }
  return JointSpatialProfile(grid, std::move(v));
}

// F_p(dx1) = int d(dx2) F(dx1, dx2), trapezoid rule on the grid.
inline std::vector<double> marginal(const JointSpatialProfile& profile) {
  const int n = profile.points();
  const double h = profile.grid().spacing_px;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) acc += (k == 0 || k == n - 1 ? 0.5 : 1.0) * profile.at(i, k);
    out[i] = acc * h;
  }
  return out;
}

inline std::vector<double> grid_coordinates(const ProfileGrid& grid) {
  std::vector<double> x(grid.points());
  for (int i = 0; i < grid.points(); ++i) x[i] = grid.coordinate(i);
  return x;
}

inline fit::ProfileFit fit_wp(const JointSpatialProfile& profile) {
  const std::vector<double> x = grid_coordinates(profile.grid());
  const std::vector<double> y = marginal(profile);
  return fit::fit_super_gaussian(x, y, 2);
}

// PDC width: e^-2 width of a Gaussian fitted to the marginal.
inline double estimate_wp(const JointSpatialProfile& profile) { return fit_wp(profile).width; }

// Conditional profile F_cp(dx1) = F(dx1, 0), or its average over dx2 across
// one pixel centred on 0.
inline std::vector<double> conditional_profile(const JointSpatialProfile& profile, bool pixel_integration) {
  const int n = profile.points();
  const int c = profile.grid().half_points();
  std::vector<double> y(n);
  if (!pixel_integration) {
    for (int i = 0; i < n; ++i) y[i] = profile.at(i, c);
    return y;
  }
  const double steps = 0.5 / profile.grid().spacing_px;
  const int r = static_cast<int>(std::lround(steps));
  if (r < 1 || std::abs(steps - r) > 1e-9) {
    throw ParameterError("pixel integration needs a grid spacing that divides half a pixel");
  }
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = -r; k <= r; ++k) acc += (std::abs(k) == r ? 0.5 : 1.0) * profile.at(i, c + k);
    y[i] = acc / (2.0 * r);
  }
  return y;
}

struct WcpTildeEstimate {
  double width = 0.0;
  int order = 2;
  fit::ProfileFit gaussian;
  fit::ProfileFit super_gaussian;
};

// Fits n = 2 and n = 4 profiles to F_cp and keeps the lower residual.
inline WcpTildeEstimate estimate_wcp_tilde(const JointSpatialProfile& profile, bool pixel_integration) {
  const std::vector<double> x = grid_coordinates(profile.grid());
  const std::vector<double> y = conditional_profile(profile, pixel_integration);
  std::optional<fit::ProfileFit> g2;
  std::optional<fit::ProfileFit> g4;
  try {
    g2 = fit::fit_super_gaussian(x, y, 2);
  } catch (const NumericalError&) {
  }
  try {
    g4 = fit::fit_super_gaussian(x, y, 4);
  } catch (const NumericalError&) {
  }
  if (!g2 && !g4) throw NumericalError("w~_cp: both Gaussian and super-Gaussian fits failed");
  WcpTildeEstimate out;
  if (g2) out.gaussian = *g2;
  if (g4) out.super_gaussian = *g4;
  const bool take4 = g4 && (!g2 || g4->rss < g2->rss);
  out.width = take4 ? g4->width : g2->width;
  out.order = take4 ? 4 : 2;
  return out;
}

// w0_cp = lambda0 f / (pi w_pump), in pixels.
inline double pump_limited_wcp(const PdcSetup& s) {
  return s.lambda0_m * s.focal_m / (std::numbers::pi * s.pump_waist_m) / s.pixel_width_m;
}

inline double combined_wcp(const PdcSetup& setup, double w_tilde) {
  setup.validate();
  if (!(w_tilde >= 0.0)) throw ParameterError("combined_wcp: w~_cp must be >= 0");
  const double w0 = pump_limited_wcp(setup);
  return std::sqrt(w_tilde * w_tilde + w0 * w0);
}

inline WcpRow wcp_row(const PdcSetup& setup, double dlambda_nm, const ProfileGrid& grid = {}) {
  PdcSetup s = setup;
  s.spectral_width_nm = dlambda_nm;
  const JointSpatialProfile profile = joint_profile(s, grid);
  WcpRow row;
  row.dlambda_nm = dlambda_nm;
  row.w_p = estimate_wp(profile);
  const WcpTildeEstimate wt = estimate_wcp_tilde(profile, false);
  row.w_tilde_cp = wt.width;
  row.order = wt.order;
  row.w0_cp = pump_limited_wcp(s);
  row.w_cp = combined_wcp(s, wt.width);
  return row;
}

inline WcpTable wcp_curve(const PdcSetup& setup, const std::vector<double>& widths_nm,
                          const ProfileGrid& grid = {}) {
  std::vector<WcpRow> rows;
  rows.reserve(widths_nm.size());
  for (double dl : widths_nm) {
    try {
      rows.push_back(wcp_row(setup, dl, grid));
    } catch (const NumericalError& e) {
      throw NumericalError("optics table at " + std::to_string(dl) + " nm: " + e.what());
    }
  }
  return WcpTable(std::move(rows));
}

inline constexpr double kTargetWp = 20.0;

// Chooses theta0 so that the fitted PDC width at the setup's spectral width
// equals target_wp. w_p falls monotonically with theta0 (the Sinc argument
// scales with theta0 L), and a Sinc^2 ~ exp(-x^2/3) estimate brackets it.
inline double calibrate_theta0(const PdcSetup& setup, const ProfileGrid& grid = {},
                               double target_wp = kTargetWp) {
  if (!(target_wp > 0.0)) throw ParameterError("calibrate_theta0: target width must be > 0");
  PdcSetup s = setup;
  auto residual = [&](double theta0) {
    s.theta0_rad = theta0;
    return estimate_wp(joint_profile(s, grid)) - target_wp;
  };
  const double guess = std::sqrt(6.0) * 2.0 * setup.focal_m /
                       (setup.pump_wavenumber() * setup.crystal_length_m * setup.pixel_width_m * target_wp);
  double lo = 0.6 * guess;
  double hi = 1.6 * guess;
  double f_lo = residual(lo);
  double f_hi = residual(hi);
  for (int i = 0; i < 8 && f_lo * f_hi > 0.0; ++i) {
    if (f_lo < 0.0) {
      lo *= 0.8;
      f_lo = residual(lo);
    } else {
      hi *= 1.25;
      f_hi = residual(hi);
    }
  }
  if (f_lo * f_hi > 0.0) throw NumericalError("calibrate_theta0: could not bracket the target w_p");
  std::uintmax_t iterations = 100;
  const auto [a, b] = boost::math::tools::toms748_solve(
      residual, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(40), iterations);
  if (iterations >= 100) throw NumericalError("calibrate_theta0: root finder did not converge");
  return 0.5 * (a + b);
}

inline PdcSetup with_calibrated_theta0(PdcSetup setup, const ProfileGrid& grid = {},
                                       double target_wp = kTargetWp) {
  if (!setup.theta0_rad) setup.theta0_rad = calibrate_theta0(setup, grid, target_wp);
  return setup;
}

}  // namespace ltg::optics
