#pragma once

// Two-qubit output state, coincidence-count model and the correlated-pixel
// calibration procedure. Basis order is {HH, HV, VH, VV}.

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ltg/errors.hpp"
#include "ltg/fitting.hpp"
#include "ltg/random.hpp"
#include "ltg/series.hpp"
#include "ltg/slm.hpp"

namespace ltg::measurement {

using Matrix4c = Eigen::Matrix4cd;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-12;
inline constexpr double kPositivityTolerance = 1e-10;

class TwoQubitState {
 public:
  explicit TwoQubitState(const Matrix4c& rho) : rho_(rho) { check(); }

  [[nodiscard]] const Matrix4c& rho() const { return rho_; }

  [[nodiscard]] double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix4c> es(rho_);
    return es.eigenvalues().minCoeff();
  }

 private:
  void check() const {
    if (!rho_.allFinite()) throw ParameterError("two-qubit state: non-finite entries");
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance) {
      throw ParameterError("two-qubit state: rho is not Hermitian");
    }
    if (std::abs(rho_.trace() - Complex{1.0, 0.0}) > kTraceTolerance) {
      throw ParameterError("two-qubit state: trace differs from 1");
    }
    if (min_eigenvalue() < -kPositivityTolerance) {
      throw ParameterError("two-qubit state: rho is not positive semidefinite");
    }
  }

  Matrix4c rho_;
};

// rho = (|HH><HH| + |VV><VV| + p G |HH><VV| + p G* |VV><HH|) / 2.
inline TwoQubitState build_state(double p, Complex gamma_value) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("build_state: purity p must lie in [0, 1]");
  if (!std::isfinite(gamma_value.real()) || !std::isfinite(gamma_value.imag())) {
    throw ParameterError("build_state: coherence factor must be finite");
  }
  if (std::abs(gamma_value) > 1.0 + 1e-12) {
    throw ParameterError("build_state: |Gamma| = " + std::to_string(std::abs(gamma_value)) + " exceeds 1");
  }
  Matrix4c rho = Matrix4c::Zero();
  rho(0, 0) = 0.5;
  rho(3, 3) = 0.5;
  rho(0, 3) = 0.5 * p * gamma_value;
  rho(3, 0) = std::conj(rho(0, 3));
  return TwoQubitState(rho);
}

namespace detail {

inline Matrix4c psd_sqrt(const Matrix4c& m) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(m);
  Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

// Wootters concurrence. The lambdas are the singular values of
// sqrt(rho) sqrt(rho~), which avoids square roots of tiny, possibly negative
// eigenvalues of the non-Hermitian rho rho~.
inline double concurrence(const TwoQubitState& state) {
  Matrix4c yy = Matrix4c::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const Matrix4c& rho = state.rho();
  const Matrix4c flipped = yy * rho.conjugate() * yy;
  const Matrix4c product = detail::psd_sqrt(rho) * detail::psd_sqrt(flipped);
  Eigen::JacobiSVD<Matrix4c> svd(product);
  const Eigen::Vector4d s = svd.singularValues();  // descending
  return std::max(0.0, s[0] - s[1] - s[2] - s[3]);
}

struct DetectionProbabilities {
  double p_pp = 0.0;  // polarizers at (45, 45)
  double p_pm = 0.0;  // polarizers at (45, 135)
};

// Full projections <++|rho|++> and <+-|rho|+->, unit quantum efficiency.
inline DetectionProbabilities detection_probabilities(const TwoQubitState& state) {
  const Eigen::Vector4cd pp = Eigen::Vector4cd(0.5, 0.5, 0.5, 0.5);
  const Eigen::Vector4cd pm = Eigen::Vector4cd(0.5, -0.5, 0.5, -0.5);
  DetectionProbabilities out;
  out.p_pp = (pp.adjoint() * state.rho() * pp)(0, 0).real();
  out.p_pm = (pm.adjoint() * state.rho() * pm)(0, 0).real();
  return out;
}

inline constexpr double kDefaultN0 = 250.0;
inline constexpr double kDefaultAcquisitionSeconds = 8.0;
inline constexpr int kDefaultRepeats = 4;

// Rates in coincidences per second, averaged over the repeats.
struct CountRecord {
  double N_pp = 0.0;
  double N_pm = 0.0;
  double N0 = kDefaultN0;
  double acquisition_s = kDefaultAcquisitionSeconds;
  int repeats = kDefaultRepeats;
  bool shot_noise = false;
};

struct CountSettings {
  double N0 = kDefaultN0;
  double acquisition_s = kDefaultAcquisitionSeconds;
  int repeats = kDefaultRepeats;
  bool shot_noise = true;

  void validate() const {
    if (!(N0 > 0.0) || !std::isfinite(N0)) throw ParameterError("counts: N0 must be > 0");
    if (!(acquisition_s > 0.0) || !std::isfinite(acquisition_s)) {
      throw ParameterError("counts: acquisition time must be > 0");
    }
    if (repeats < 1) throw ParameterError("counts: repeats must be >= 1");
  }
};

// Expected counts per acquisition are 4 N0 p acquisition_s, i.e.
// N0 (1 +- p Re G) acquisition_s. With shot noise each repeat draws Poisson
// counts from substream 2r (++) and 2r+1 (+-) of the seed.
inline CountRecord simulate_counts(const DetectionProbabilities& probs, const CountSettings& settings,
                                   const SeedSpec& seed) {
  settings.validate();
  if (!(probs.p_pp >= -1e-15) || !(probs.p_pm >= -1e-15)) {
    throw ParameterError("counts: detection probabilities must be >= 0");
  }
  const double mean_pp = 4.0 * settings.N0 * std::max(0.0, probs.p_pp) * settings.acquisition_s;
  const double mean_pm = 4.0 * settings.N0 * std::max(0.0, probs.p_pm) * settings.acquisition_s;
  CountRecord rec;
  rec.N0 = settings.N0;
  rec.acquisition_s = settings.acquisition_s;
  rec.repeats = settings.repeats;
  rec.shot_noise = settings.shot_noise;
  if (!settings.shot_noise) {
    rec.N_pp = mean_pp / settings.acquisition_s;
    rec.N_pm = mean_pm / settings.acquisition_s;
    return rec;
  }
  double sum_pp = 0.0;
  double sum_pm = 0.0;
  for (int r = 0; r < settings.repeats; ++r) {
    RngStream g_pp(seed.with_substream(static_cast<std::uint32_t>(2 * r)));
    RngStream g_pm(seed.with_substream(static_cast<std::uint32_t>(2 * r + 1)));
    if (mean_pp > 0.0) sum_pp += static_cast<double>(std::poisson_distribution<std::int64_t>(mean_pp)(g_pp));
    if (mean_pm > 0.0) sum_pm += static_cast<double>(std::poisson_distribution<std::int64_t>(mean_pm)(g_pm));
  }
  rec.N_pp = sum_pp / (settings.repeats * settings.acquisition_s);
  rec.N_pm = sum_pm / (settings.repeats * settings.acquisition_s);
  return rec;
}

// V = |(N_pp - N_pm) / (N_pp + N_pm)|.
inline double visibility(const CountRecord& record) {
  if (record.N_pp < 0.0 || record.N_pm < 0.0) throw ParameterError("visibility: negative counts");
  const double total = record.N_pp + record.N_pm;
  if (!(total > 0.0)) throw UndefinedVisibilityError("visibility: no coincidences recorded");
  return std::abs((record.N_pp - record.N_pm) / total);
}

// ---------------------------------------------------------------------------
// Correlated-pixel calibration

struct CalibrationSettings {
  slm::KernelParams kernel;  // kernel.w_cp is the true (hidden) width
  int n_r = 5;
  double amplitude = std::numbers::pi / 4.0;
  int h_min = -10;
  int h_max = 9;
  double p = 0.927;
  CountSettings counts;
  SeedSpec seed{};
  // Simulated calibration curve Vis(w_cp).
  double curve_w_min = 0.5;
  double curve_w_max = 10.0;
  int curve_samples = 20;
  int curve_degree = 3;

  void validate() const {
    kernel.validate();
    if (n_r < 1) throw ParameterError("calibration: n_r must be >= 1");
    if (h_max < h_min) throw ParameterError("calibration: empty h range");
    if (std::max(std::abs(h_min), std::abs(h_max)) >= kernel.geometry.pixels_per_half) {
      throw RangeError("calibration: shift h moves the pattern off the mask");
    }
    if (!(p > 0.0 && p <= 1.0)) throw ParameterError("calibration: purity p must lie in (0, 1]");
    counts.validate();
    if (!(curve_w_min > 0.0) || !(curve_w_max > curve_w_min)) {
      throw ParameterError("calibration: curve range must satisfy 0 < w_min < w_max");
    }
    if (curve_degree < 1 || curve_samples <= curve_degree) {
      throw ParameterError("calibration: need more curve samples than the polynomial degree");
    }
  }
};

struct SineFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double vis = 0.0;
  double vis_std_error = 0.0;
};

struct CalibrationCurve {
  std::vector<double> w_cp;
  std::vector<double> vis;
  fit::Polynomial polynomial;
  double rms_residual = 0.0;
};

struct CalibrationResult {
  std::vector<int> h_values;
  std::vector<double> V_of_h;
  std::vector<CountRecord> counts;
  double fitted_amplitude = 0.0;
  double fitted_offset = 0.0;
  double vis_of_V = 0.0;
  double vis_std_error = 0.0;
  double w_cp_estimate = 0.0;
  double w_cp_uncertainty = 0.0;
  CalibrationCurve curve;
};

// Least-squares V(h) ~ c0 + c1 sin(pi h / n_r) + c2 cos(pi h / n_r);
// Vis = hypot(c1, c2) / c0, with its standard error from the fit covariance.
inline SineFit fit_sine(const std::vector<int>& h, const std::vector<double>& v, int n_r) {
  if (h.size() != v.size() || h.size() < 4) throw NumericalError("sine fit: need at least 4 samples");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(h.size()), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(h.size()));
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double arg = std::numbers::pi * h[i] / n_r;
    const auto r = static_cast<Eigen::Index>(i);
    X(r, 0) = 1.0;
    X(r, 1) = std::sin(arg);
    X(r, 2) = std::cos(arg);
    y[r] = v[i];
  }
  const fit::LinearFit lf = fit::linear_least_squares(X, y);
  const double c0 = lf.coefficients[0];
  const double c1 = lf.coefficients[1];
  const double c2 = lf.coefficients[2];
  SineFit out;
  out.offset = c0;
  out.amplitude = std::hypot(c1, c2);
  if (!(c0 > 0.0)) throw NumericalError("sine fit: non-positive offset");
  out.vis = out.amplitude / c0;
  if (!(out.vis >= 0.0 && out.vis <= 1.0)) {
    throw NumericalError("sine fit: visibility of V(h) = " + std::to_string(out.vis) + " outside [0, 1]");
  }
  // Gradient of A / c0 with respect to (c0, c1, c2).
  Eigen::Vector3d grad(-out.vis / c0, 0.0, 0.0);
  if (out.amplitude > 0.0) {
    grad[1] = c1 / (out.amplitude * c0);
    grad[2] = c2 / (out.amplitude * c0);
  }
  out.vis_std_error = std::sqrt(std::max(0.0, grad.dot(lf.covariance * grad)));
  return out;
}

namespace detail {

struct VhSample {
  std::vector<int> h;
  std::vector<double> V;
  std::vector<CountRecord> counts;
};

inline VhSample measure_v_of_h(const CalibrationSettings& s, const slm::KernelParams& kernel,
                               const CountSettings& counts, std::uint64_t stream_offset) {
  const std::vector<double> times{0.0};
  const slm::CorrelationKernel k = slm::build_kernel(kernel);
  const slm::PhaseField field = slm::rectangular_field(kernel.geometry, s.n_r, s.amplitude, times);
  VhSample out;
  for (int h = s.h_min; h <= s.h_max; ++h) {
    const Complex g = slm::gamma_delta(k, field, field, h, times).values[0];
    const TwoQubitState rho = build_state(s.p, g);
    const SeedSpec seed = s.seed.with_stream(s.seed.stream_index + stream_offset +
                                             static_cast<std::uint64_t>(h - s.h_min));
    const CountRecord rec = simulate_counts(detection_probabilities(rho), counts, seed);
    out.h.push_back(h);
    out.V.push_back(visibility(rec));
    out.counts.push_back(rec);
  }
  return out;
}

}  // namespace detail

// Vis(V(h)) on an even grid of w_cp, noise-free, and its polynomial fit.
inline CalibrationCurve calibration_curve(const CalibrationSettings& s) {
  s.validate();
  CalibrationCurve curve;
  CountSettings exact = s.counts;
  exact.shot_noise = false;
  for (int i = 0; i < s.curve_samples; ++i) {
    const double w = s.curve_w_min + (s.curve_w_max - s.curve_w_min) * i / (s.curve_samples - 1);
    slm::KernelParams kp = s.kernel;
    kp.w_cp = w;
    const detail::VhSample vh = detail::measure_v_of_h(s, kp, exact, 0);
    curve.w_cp.push_back(w);
    curve.vis.push_back(fit_sine(vh.h, vh.V, s.n_r).vis);
  }
  curve.polynomial = fit::fit_polynomial(curve.w_cp, curve.vis, s.curve_degree);
  double rss = 0.0;
  for (std::size_t i = 0; i < curve.w_cp.size(); ++i) {
    const double r = curve.polynomial(curve.w_cp[i]) - curve.vis[i];
    rss += r * r;
  }
  const double dof = static_cast<double>(curve.w_cp.size()) - (s.curve_degree + 1);
  curve.rms_residual = std::sqrt(rss / std::max(1.0, dof));
  return curve;
}

// Solves poly(w) = vis on the falling branch of the fitted curve: the
// longest run of grid intervals inside the sampled range where the
// polynomial decreases.
inline double invert_curve(const CalibrationCurve& curve, double vis) {
  const fit::Polynomial& poly = curve.polynomial;
  const double lo = curve.w_cp.front();
  const double hi = curve.w_cp.back();
  constexpr int kScan = 2000;
  int best_begin = 0;
  int best_len = 0;
  int run_begin = 0;
  int run_len = 0;
  for (int i = 0; i < kScan; ++i) {
    const double a = lo + (hi - lo) * i / kScan;
    const double b = lo + (hi - lo) * (i + 1) / kScan;
    if (poly(b) < poly(a)) {
      if (run_len == 0) run_begin = i;
      ++run_len;
      if (run_len > best_len) {
        best_len = run_len;
        best_begin = run_begin;
      }
    } else {
      run_len = 0;
    }
  }
  if (best_len == 0) throw NumericalError("calibration curve has no decreasing branch");
  const double a = lo + (hi - lo) * best_begin / kScan;
  const double b = lo + (hi - lo) * (best_begin + best_len) / kScan;
  auto f = [&](double w) { return poly(w) - vis; };
  const double fa = f(a);
  const double fb = f(b);
  if (fa < 0.0 || fb > 0.0) {
    throw NumericalError("calibration: Vis = " + std::to_string(vis) + " outside the curve range [" +
                         std::to_string(poly(b)) + ", " + std::to_string(poly(a)) + "]");
  }
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  std::uintmax_t iterations = 100;
  const auto [x0, x1] = boost::math::tools::toms748_solve(
      f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(45), iterations);
  return 0.5 * (x0 + x1);
}

inline CalibrationResult calibrate_wcp(const CalibrationSettings& s) {
  s.validate();
  CalibrationResult out;
  // Only the measured V(h) draws random counts; the curve is noise-free.
  const detail::VhSample vh = detail::measure_v_of_h(s, s.kernel, s.counts, 0);
  out.h_values = vh.h;
  out.V_of_h = vh.V;
  out.counts = vh.counts;
  const SineFit sf = fit_sine(vh.h, vh.V, s.n_r);
  out.fitted_amplitude = sf.amplitude;
  out.fitted_offset = sf.offset;
  out.vis_of_V = sf.vis;
  out.vis_std_error = sf.vis_std_error;
  out.curve = calibration_curve(s);
  out.w_cp_estimate = invert_curve(out.curve, sf.vis);
  const double slope = std::abs(out.curve.polynomial.derivative(out.w_cp_estimate));
  const double spread = std::hypot(sf.vis_std_error, out.curve.rms_residual);
  if (!(slope > 0.0)) throw NumericalError("calibration: flat curve at the estimate");
  out.w_cp_uncertainty = spread / slope;
  return out;
}

}  // namespace ltg::measurement
