#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>

#include "ltg/analytic.hpp"

using namespace ltg;

namespace {

// Independent oracle: the two-state telegraph process propagated with the
// matrix exponential of its generator, <e^{i m phi}> = 1/2 1^T exp(M t) 1.
double generator_oracle(double gamma, int m, double t) {
  Eigen::Matrix2cd M;
  M << Complex(-gamma, m), Complex(gamma, 0.0), Complex(gamma, 0.0), Complex(-gamma, -m);
  const Eigen::Matrix2cd E = (M * t).exp();
  return (0.5 * E.sum()).real();
}

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST(ExpMoment, FrozenValues) {
  // Frozen from the generator oracle evaluated at 40 digits.
  EXPECT_NEAR(analytic::exp_moment(0.12, 4, 1.0), -0.60105183631753472505, 1e-14);
  EXPECT_NEAR(analytic::exp_moment(0.12, 2, 0.7), 0.21299536712865188826, 1e-14);
  EXPECT_NEAR(analytic::exp_moment(1.0, 2, 1.3), -0.049288233020781999267, 1e-14);
  EXPECT_NEAR(analytic::exp_moment(2.0, 2, 0.9), 0.46283688702044229402, 1e-14);
  EXPECT_NEAR(analytic::exp_moment(4.0, 2, 2.0), 0.36887691044750765902, 1e-14);
  EXPECT_NEAR(analytic::exp_moment(4.0, 4, 0.5), 0.40600584970983807568, 1e-14);
  EXPECT_NEAR(analytic::exp_moment(10.0, 4, 3.0), 0.085434283538912072746, 1e-14);
  EXPECT_NEAR(analytic::exp_moment(0.5, 4, 5.5), -0.061760623889453836899, 1e-14);
}

TEST(ExpMoment, MatchesGeneratorOracle) {
  for (double gamma : {0.0, 0.05, 0.12, 1.0, 1.999, 2.0, 2.001, 3.0, 4.0, 7.5}) {
    for (int m : {1, 2, 4}) {
      for (double t : {0.0, 0.1, 0.5, 1.0, 2.5, 6.0}) {
        EXPECT_NEAR(analytic::exp_moment(gamma, m, t), generator_oracle(gamma, m, t), 1e-11)
            << "gamma=" << gamma << " m=" << m << " t=" << t;
      }
    }
  }
}

TEST(ExpMoment, StaticLimitIsCosine) {
  for (int m : {1, 2, 4}) {
    for (int i = 0; i <= 100; ++i) {
      const double t = 0.05 * i;
      EXPECT_NEAR(analytic::exp_moment(0.0, m, t), std::cos(m * t), 1e-15);
    }
  }
}

TEST(ExpMoment, ContinuousAcrossCriticalDamping) {
  for (int m : {2, 4}) {
    for (double t : {0.3, 1.0, 4.0}) {
      const double at = analytic::exp_moment(m, m, t);
      EXPECT_NEAR(analytic::exp_moment(m - 1e-7, m, t), at, 1e-6);
      EXPECT_NEAR(analytic::exp_moment(m + 1e-7, m, t), at, 1e-6);
      EXPECT_NEAR(analytic::exp_moment(m + 5e-10, m, t), at, 1e-8);  // degenerate branch
    }
  }
}

TEST(ExpMoment, StartsAtOneAndStaysBounded) {
  for (double gamma : {0.0, 0.12, 2.0, 50.0}) {
    EXPECT_DOUBLE_EQ(analytic::exp_moment(gamma, 4, 0.0), 1.0);
    for (int i = 0; i < 200; ++i) {
      const double v = analytic::exp_moment(gamma, 4, 0.1 * i);
      EXPECT_LE(std::abs(v), 1.0 + 1e-15);
    }
  }
}

TEST(ExpMoment, LargeGammaTimeStaysFinite) {
  const double v = analytic::exp_moment(1e3, 2, 1e3);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_GT(v, 0.0);
  // Motional narrowing: ~ exp(-m^2 t / (2 gamma)).
  EXPECT_NEAR(std::log(v), -4.0 * 1e3 / 2e3, 1e-2);
}

TEST(ExpMoment, RejectsBadArguments) {
  EXPECT_THROW(analytic::exp_moment(-0.1, 2, 1.0), ParameterError);
  EXPECT_THROW(analytic::exp_moment(0.1, 0, 1.0), ParameterError);
  EXPECT_THROW(analytic::exp_moment(0.1, 2, -1.0), ParameterError);
  EXPECT_THROW(analytic::exp_moment(std::nan(""), 2, 1.0), ParameterError);
}

TEST(CoherenceFactors, StaticLimits) {
  const auto times = default_time_grid();
  const CoherenceSeries ge = analytic::gamma_ge(0.0, times);
  const CoherenceSeries le = analytic::gamma_le(0.0, times);
  ASSERT_EQ(ge.size(), 400u);
  for (std::size_t i = 0; i < times.size(); ++i) {
    EXPECT_NEAR(std::abs(ge.values[i]), std::abs(std::cos(4 * times[i])), 1e-12);
    EXPECT_NEAR(le.values[i].real(), std::pow(std::cos(2 * times[i]), 2), 1e-12);
    EXPECT_EQ(ge.values[i].imag(), 0.0);
  }
  EXPECT_EQ(ge.provenance, Provenance::analytic);
}

TEST(CoherenceFactors, LocalIsSquareOfSecondMoment) {
  const auto times = linspace(0.0, kPi, 31);
  const CoherenceSeries le = analytic::gamma_le(0.7, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double m2 = analytic::exp_moment(0.7, 2, times[i]);
    EXPECT_DOUBLE_EQ(le.values[i].real(), m2 * m2);
  }
}

TEST(CoherenceFactors, EntanglementIsMagnitude) {
  const CoherenceSeries ge = analytic::gamma_ge(0.12, linspace(0.0, 3.0, 50));
  const auto e = analytic::entanglement(ge);
  for (std::size_t i = 0; i < e.size(); ++i) EXPECT_EQ(e[i], std::abs(ge.values[i]));
}

TEST(CoherenceFactors, RejectsDescendingGrid) {
  EXPECT_THROW(analytic::gamma_ge(0.1, {0.0, 1.0, 0.5}), RangeError);
  EXPECT_THROW(analytic::gamma_ge(0.1, {-1.0, 0.0}), RangeError);
}
