#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "ltg/analytic.hpp"
#include "ltg/parallel.hpp"
#include "ltg/slm.hpp"

using namespace ltg;

namespace {

slm::KernelParams kernel_params(double w_cp, int order = 2) {
  slm::KernelParams k;
  k.w_cp = w_cp;
  k.order = order;
  return k;
}

// Direct double sum over mask pixels, written from the pixel coordinates.
Complex brute_force(const slm::KernelParams& kp, const slm::PhaseField& f1, const slm::PhaseField& f2,
                    int delta, std::size_t ti) {
  const slm::MaskGeometry& g = kp.geometry;
  const int N = g.pixels_per_half;
  const double cj = g.j0 + kp.center_offset_j;
  const double ck = g.k0 + kp.center_offset_k;
  double norm = 0.0;
  Complex sum{0.0, 0.0};
  for (int j = 0; j < N; ++j) {
    for (int k = N; k < 2 * N; ++k) {
      const double a = j - cj;
      const double b = k - ck;
      const double w = std::exp(-2.0 * std::pow(std::abs(a - b), kp.order) / std::pow(kp.w_cp, kp.order)) *
                       std::exp(-2.0 * a * a / (kp.w_p * kp.w_p)) * std::exp(-2.0 * b * b / (kp.w_p * kp.w_p));
      norm += w;
      const int o1 = (j - g.j0) + N / 2;
      const int o2 = (k + delta - g.k0) + N / 2;
      if (o1 < 0 || o1 >= N || o2 < 0 || o2 >= N) continue;
      sum += w * std::polar(1.0, f1.imprint_factor() * f1.phi(o1, ti) + f2.imprint_factor() * f2.phi(o2, ti));
    }
  }
  return sum / norm;
}

}  // namespace

TEST(Kernel, NormalizedAndSymmetric) {
  const auto k = slm::build_kernel(kernel_params(3.0));
  EXPECT_NEAR(k.total(), 1.0, 1e-12);
  for (int j = 0; j < k.size(); j += 7) {
    for (int c = 0; c < k.size(); c += 5) {
      EXPECT_GE(k.weight(j, c), 0.0);
      EXPECT_NEAR(k.weight(j, c), k.weight(c, j), 1e-18);
    }
  }
}

TEST(Kernel, OddOrderRejectedWithRule) {
  try {
    slm::build_kernel(kernel_params(3.0, 3));
    FAIL() << "odd order accepted";
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("even"), std::string::npos);
  }
}

TEST(Kernel, NarrowWidthConcentratesOnDiagonal) {
  const auto k = slm::build_kernel(kernel_params(0.3, 4));
  double diag = 0.0;
  for (int j = 0; j < k.size(); ++j) diag += k.weight(j, j);
  EXPECT_NEAR(diag, 1.0, 1e-12);
}

TEST(Kernel, RejectsBadParameters) {
  EXPECT_THROW(slm::build_kernel(kernel_params(0.0)), ParameterError);
  slm::KernelParams k = kernel_params(3.0);
  k.geometry.k0 = 10;
  EXPECT_THROW(slm::build_kernel(k), ParameterError);
}

TEST(BalancedBlocks, CoverageAndPairing) {
  std::size_t n_sources = 0;
  const auto blocks = slm::detail::balanced_blocks(320, 3, n_sources);
  int full_blocks = 0;
  std::vector<int> covered(320, 0);
  for (const auto& b : blocks) {
    for (int i = b.begin; i < b.end; ++i) ++covered[i];
    if (b.end - b.begin == 3) ++full_blocks;
  }
  for (int c : covered) EXPECT_EQ(c, 1);
  EXPECT_EQ(full_blocks, 106);
  EXPECT_EQ(n_sources, 26u * 2 + 1 + 1);
  // A block and its mirror are never neighbours.
  for (std::size_t i = 0; i + 1 < blocks.size(); ++i) {
    if (blocks[i + 1].end <= 26 * 12) {
      EXPECT_NE(blocks[i].source, blocks[i + 1].source) << "block " << i;
    }
  }
}

TEST(PhaseField, BalancedFieldSumsToZero) {
  const auto times = linspace(0.0, 3.0, 25);
  for (int n_rep : {1, 3, 5, 7}) {
    const auto f = slm::build_phase_field(0.7, times, n_rep, slm::MaskGeometry{}, SeedSpec{5, 2, 0}, true);
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      double sum = 0.0;
      for (int i = 0; i < f.offsets(); ++i) sum += f.phi(i, ti);
      EXPECT_NEAR(sum, 0.0, 1e-12) << "n_rep=" << n_rep;
    }
  }
}

TEST(PhaseField, BlocksShareOnePhase) {
  const auto times = linspace(0.0, 2.0, 11);
  const auto f = slm::build_phase_field(1.0, times, 3, slm::MaskGeometry{}, SeedSpec{1, 2, 0}, false);
  EXPECT_EQ(f.blocks().size(), 107u);
  for (int i = 0; i + 1 < f.offsets(); ++i) {
    if (i / 3 == (i + 1) / 3) {
      for (std::size_t ti = 0; ti < times.size(); ++ti) EXPECT_EQ(f.phi(i, ti), f.phi(i + 1, ti));
    }
  }
}

TEST(PhaseField, RectangularPattern) {
  const auto f = slm::rectangular_field(slm::MaskGeometry{}, 5, 0.25, {0.0});
  EXPECT_EQ(f.phi(0, 0), 0.25);
  EXPECT_EQ(f.phi(4, 0), 0.25);
  EXPECT_EQ(f.phi(5, 0), -0.25);
  EXPECT_EQ(f.phi(10, 0), 0.25);
  EXPECT_EQ(f.imprint_factor(), 1.0);
  EXPECT_THROW(slm::rectangular_field(slm::MaskGeometry{}, 0, 0.25, {0.0}), ParameterError);
}

TEST(GammaDelta, MatchesDirectDoubleSum) {
  const auto times = linspace(0.0, 2.0, 5);
  slm::KernelParams kp = kernel_params(2.5);
  kp.center_offset_j = 0.3;
  const auto kernel = slm::build_kernel(kp);
  const auto f1 = slm::build_phase_field(0.5, times, 3, kp.geometry, SeedSpec{3, 2, 0}, true);
  const auto f2 = slm::build_phase_field(0.5, times, 3, kp.geometry, SeedSpec{4, 2, 0}, false);
  for (int delta : {0, 2, -7, 200}) {
    const auto s = slm::gamma_delta(kernel, f1, f2, delta, times);
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      const Complex ref = brute_force(kp, f1, f2, delta, ti);
      EXPECT_NEAR(std::abs(s.values[ti] - ref), 0.0, 1e-12) << "delta=" << delta << " t=" << times[ti];
    }
  }
}

TEST(GammaDelta, StartsAtKernelMass) {
  const auto times = linspace(0.0, 1.0, 3);
  const auto kernel = slm::build_kernel(kernel_params(3.0));
  const auto f = slm::build_phase_field(0.12, times, 3, kernel.params().geometry, SeedSpec{}, true);
  const auto s = slm::gamma_delta(kernel, f, f, 0, times);
  EXPECT_NEAR(s.values[0].real(), 1.0, 1e-12);
  EXPECT_EQ(s.provenance, Provenance::kernel_sum);
  // Shifting the second half off the beam drops its mass unrenormalized.
  const auto far = slm::gamma_delta(kernel, f, f, 300, times);
  EXPECT_LT(std::abs(far.values[0]), 1e-6);
}

TEST(GammaDelta, StructuralMismatchThrows) {
  const auto times = linspace(0.0, 1.0, 3);
  const auto kernel = slm::build_kernel(kernel_params(3.0));
  const auto f = slm::build_phase_field(0.1, times, 3, kernel.params().geometry, SeedSpec{}, true);
  slm::MaskGeometry other;
  other.pixels_per_half = 322;
  other.k0 = 483;
  const auto g = slm::build_phase_field(0.1, times, 3, other, SeedSpec{}, true);
  EXPECT_THROW(slm::gamma_delta(kernel, f, g, 0, times), StructuralError);
  EXPECT_THROW(slm::gamma_delta(kernel, f, f, 0, linspace(0.0, 1.0, 4)), StructuralError);
}

TEST(GammaDelta, IndependentOfThreadCount) {
  const auto times = default_time_grid();
  const auto kernel = slm::build_kernel(kernel_params(3.0));
  const auto f = slm::build_phase_field(0.12, times, 3, kernel.params().geometry, SeedSpec{9, 2, 0}, true);
  set_thread_count(1);
  const auto a = slm::gamma_delta(kernel, f, f, 1, times);
  set_thread_count(4);
  const auto b = slm::gamma_delta(kernel, f, f, 1, times);
  set_thread_count(0);
  for (std::size_t i = 0; i < times.size(); ++i) EXPECT_EQ(a.values[i], b.values[i]);
}

TEST(GammaDelta, StaticFieldRecoversGlobalEnvelopeWhenNarrow) {
  // gamma = 0 with a narrow kernel: every pixel carries +-t, so delta = 0
  // gives sum_j W_jj exp(+-4 i t) with a real part exactly cos 4t.
  const auto times = linspace(0.0, std::numbers::pi, 41);
  const auto kernel = slm::build_kernel(kernel_params(0.3, 4));
  const auto f = slm::build_phase_field(0.0, times, 3, kernel.params().geometry, SeedSpec{2, 2, 0}, true);
  const auto s = slm::gamma_delta(kernel, f, f, 0, times);
  for (std::size_t i = 0; i < times.size(); ++i) EXPECT_NEAR(s.values[i].real(), std::cos(4 * times[i]), 1e-12);
}

TEST(Sweeps, DeltaRangeChecked) {
  slm::FieldSettings fs;
  fs.times = linspace(0.0, 1.0, 3);
  EXPECT_THROW(slm::transition_sweep_delta(fs, {320}, kernel_params(3.0)), RangeError);
  EXPECT_TRUE(slm::transition_sweep_delta(fs, {}, kernel_params(3.0)).empty());
  const auto out = slm::transition_sweep_delta(fs, {0, 3}, kernel_params(3.0));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[1].params.at("delta"), 3.0);
}

TEST(Sweeps, SpectralUsesTableWidths) {
  const WcpTable table({{10.0, 20.0, 1.25, 2, 0.86, 1.5}, {40.0, 20.0, 3.6, 4, 0.86, 3.7}});
  slm::FieldSettings fs;
  fs.times = linspace(0.0, 1.0, 3);
  const auto out = slm::transition_sweep_spectral(fs, {10.0, 40.0}, table, kernel_params(3.0));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].params.at("w_cp"), 1.5);
  EXPECT_EQ(out[1].params.at("order"), 4.0);
  EXPECT_THROW(slm::transition_sweep_spectral(fs, {200.0}, table, kernel_params(3.0)), RangeError);
}

TEST(WcpTableLookup, ExactInterpolatedAndOutOfRange) {
  const WcpTable table({{40.0, 20.0, 3.6, 4, 0.86, 3.7}, {10.0, 20.0, 1.25, 2, 0.86, 1.5}});
  EXPECT_EQ(table.min_dlambda(), 10.0);
  EXPECT_EQ(table.lookup(10.0).w_cp, 1.5);
  EXPECT_NEAR(table.lookup(25.0).w_cp, 2.6, 1e-12);
  EXPECT_EQ(table.lookup(20.0).order, 2);
  EXPECT_EQ(table.lookup(30.0).order, 4);
  try {
    (void)table.lookup(200.0);
    FAIL();
  } catch (const RangeError& e) {
    EXPECT_NE(std::string(e.what()).find("[10, 40]"), std::string::npos);
  }
}

TEST(WcpTableIo, ParsesAndReportsLines) {
  std::istringstream good("# comment\ndlambda_nm,w_p,w_tilde_cp,order,w0_cp,w_cp\n15,20,1.4,2,0.86,1.7\n");
  const WcpTable t = read_wcp_table(good);
  ASSERT_EQ(t.rows().size(), 1u);
  EXPECT_EQ(t.rows()[0].w_cp, 1.7);
  std::istringstream bad("dlambda_nm,w_p,w_tilde_cp,order,w0_cp,w_cp\n15,20,x,2,0.86,1.7\n");
  try {
    read_wcp_table(bad);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}
