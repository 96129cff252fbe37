#pragma once

// Least-squares fitting used by the optics and calibration modules.

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "ltg/errors.hpp"

namespace ltg::fit {

// y = amplitude * exp(-2 |x - center|^order / width^order); width is the
// e^-2 point of the profile, the convention used by every width in the
// library.
struct ProfileFit {
  double amplitude = 0.0;
  double center = 0.0;
  double width = 0.0;
  int order = 2;
  double rss = 0.0;           // residual sum of squares
  double relative_rss = 0.0;  // rss / sum y^2
};

namespace detail {

struct SuperGaussianResidual {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  std::span<const double> x;
  std::span<const double> y;
  int order;

  [[nodiscard]] int inputs() const { return 3; }
  [[nodiscard]] int values() const { return static_cast<int>(x.size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double z = std::abs((x[i] - p[1]) / p[2]);
      r[static_cast<Eigen::Index>(i)] = p[0] * std::exp(-2.0 * std::pow(z, order)) - y[i];
    }
    return 0;
  }

  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& J) const {
    const double n = order;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double z = (x[i] - p[1]) / p[2];
      const double az = std::abs(z);
      const double e = std::exp(-2.0 * std::pow(az, order));
      const auto row = static_cast<Eigen::Index>(i);
      J(row, 0) = e;
      J(row, 1) = p[0] * e * 2.0 * n * std::pow(az, n - 1.0) * (z < 0 ? -1.0 : 1.0) / p[2];
      J(row, 2) = p[0] * e * 2.0 * n * std::pow(az, n) / p[2];
    }
    return 0;
  }
};

}  // namespace detail

inline ProfileFit fit_super_gaussian(std::span<const double> x, std::span<const double> y, int order) {
  if (x.size() != y.size() || x.size() < 4) {
    throw NumericalError("profile fit: need at least 4 matching samples");
  }
  if (order < 2 || order % 2 != 0) throw ParameterError("profile fit: order must be even");
  double peak = 0.0;
  double sum = 0.0;
  double first = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    peak = std::max(peak, y[i]);
    sum += y[i];
    first += x[i] * y[i];
  }
  if (!(peak > 0.0) || !(sum > 0.0)) throw NumericalError("profile fit: profile has no positive mass");
  const double center = first / sum;
  double second = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) second += (x[i] - center) * (x[i] - center) * y[i];
  const double sigma = std::sqrt(second / sum);

  Eigen::VectorXd p(3);
  p << peak, center, std::max(2.0 * sigma, 1e-6);
  detail::SuperGaussianResidual residual{x, y, order};
  Eigen::LevenbergMarquardt<detail::SuperGaussianResidual> lm(residual);
  lm.parameters.ftol = 1e-15;
  lm.parameters.xtol = 1e-15;
  lm.parameters.maxfev = 4000;
  const int info = lm.minimize(p);
  if (info <= 0 || info == Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation ||
      !p.allFinite() || p[2] == 0.0) {
    throw NumericalError("profile fit (order " + std::to_string(order) + ") did not converge");
  }

  ProfileFit out;
  out.amplitude = p[0];
  out.center = p[1];
  out.width = std::abs(p[2]);
  out.order = order;
  Eigen::VectorXd r(static_cast<Eigen::Index>(x.size()));
  residual(p, r);
  out.rss = r.squaredNorm();
  double y2 = 0.0;
  for (double v : y) y2 += v * v;
  out.relative_rss = out.rss / y2;
  return out;
}

struct LinearFit {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;  // s^2 (X^T X)^-1 with s^2 = rss / (n - p)
  double rss = 0.0;
};

// Ordinary least squares y ~ X b.
inline LinearFit linear_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size() || X.rows() < X.cols()) {
    throw NumericalError("least squares: underdetermined system");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) throw NumericalError("least squares: design matrix is rank deficient");
  LinearFit out;
  out.coefficients = qr.solve(y);
  out.rss = (X * out.coefficients - y).squaredNorm();
  const double dof = static_cast<double>(X.rows() - X.cols());
  const double s2 = dof > 0 ? out.rss / dof : 0.0;
  out.covariance = s2 * (X.transpose() * X).inverse();
  if (!out.coefficients.allFinite()) throw NumericalError("least squares: non-finite solution");
  return out;
}

// Polynomial in the scaled variable z = (x - shift) / scale.
struct Polynomial {
  std::vector<double> coefficients;  // ascending powers of z
  double shift = 0.0;
  double scale = 1.0;

  [[nodiscard]] double operator()(double x) const {
    const double z = (x - shift) / scale;
    double v = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) v = v * z + *it;
    return v;
  }

  [[nodiscard]] double derivative(double x) const {
    const double z = (x - shift) / scale;
    double v = 0.0;
    for (std::size_t k = coefficients.size(); k-- > 1;) v = v * z + k * coefficients[k];
    return v / scale;
  }
};

inline Polynomial fit_polynomial(std::span<const double> x, std::span<const double> y, int degree) {
  if (x.size() != y.size() || static_cast<int>(x.size()) <= degree) {
    throw NumericalError("polynomial fit: not enough samples for the degree");
  }
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  Polynomial poly;
  poly.shift = 0.5 * (*lo + *hi);
  poly.scale = *hi > *lo ? 0.5 * (*hi - *lo) : 1.0;
  Eigen::MatrixXd X(static_cast<Eigen::Index>(x.size()), degree + 1);
  Eigen::VectorXd Y(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = (x[i] - poly.shift) / poly.scale;
    double zk = 1.0;
    for (int k = 0; k <= degree; ++k, zk *= z) X(static_cast<Eigen::Index>(i), k) = zk;
    Y[static_cast<Eigen::Index>(i)] = y[i];
  }
  const LinearFit f = linear_least_squares(X, Y);
  poly.coefficients.assign(f.coefficients.data(), f.coefficients.data() + f.coefficients.size());
  return poly;
}

}  // namespace ltg::fit
