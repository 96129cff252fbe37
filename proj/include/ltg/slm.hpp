#pragma once

// Spatial-light-modulator emulation. The 1D mask is split into two halves of
// pixels_per_half pixels: half 1 (indices j) carries photon 1, half 2
// (indices k) photon 2. Noise phases are written relative to the reference
// pixels j0 and k0, and the decoherence function is the kernel-weighted sum
//   Gamma(delta, t) = sum_jk |f_jk|^2 exp(i [phi1(j, t) + phi2(k + delta, t)]).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "ltg/errors.hpp"
#include "ltg/parallel.hpp"
#include "ltg/random.hpp"
#include "ltg/rtn.hpp"
#include "ltg/series.hpp"
#include "ltg/wcp_table.hpp"

namespace ltg::slm {

struct MaskGeometry {
  int pixels_per_half = 320;
  double pixel_width_m = 100e-6;
  int j0 = 160;  // reference pixel of half 1
  int k0 = 480;  // reference pixel of half 2

  void validate() const {
    if (pixels_per_half < 2 || pixels_per_half % 2 != 0) {
      throw ParameterError("mask: pixels_per_half must be an even count >= 2");
    }
    if (!(pixel_width_m > 0.0)) throw ParameterError("mask: pixel width must be > 0");
    if (j0 < 0 || j0 >= pixels_per_half) throw ParameterError("mask: j0 must lie in half 1");
    if (k0 < pixels_per_half || k0 >= 2 * pixels_per_half) {
      throw ParameterError("mask: k0 must lie in half 2");
    }
  }

  [[nodiscard]] double x1(int j) const { return pixel_width_m * j; }
  [[nodiscard]] double x2(int k) const { return pixel_width_m * (2 * pixels_per_half - k); }

  // Field offsets run over [-N/2, N/2); offset_index = delta + N/2.
  [[nodiscard]] int first_offset() const { return -pixels_per_half / 2; }

  friend bool operator==(const MaskGeometry&, const MaskGeometry&) = default;
};

struct KernelParams {
  double w_cp = 3.0;  // correlated-pixel width, pixels
  double w_p = 20.0;  // PDC width, pixels
  int order = 2;      // super-Gaussian order n of the correlation factor
  MaskGeometry geometry;
  // Sub-pixel displacement of the beam centres from the reference pixels.
  double center_offset_j = 0.0;
  double center_offset_k = 0.0;

  void validate() const {
    geometry.validate();
    if (order < 2 || order % 2 != 0) {
      throw ParameterError("kernel: super-Gaussian order n = " + std::to_string(order) +
                           " must be even and >= 2 (odd n makes (j-j0)-(k-k0))^n sign-unsafe)");
    }
    if (!(w_cp > 0.0) || !std::isfinite(w_cp)) throw ParameterError("kernel: w_cp must be > 0");
    if (!(w_p > 0.0) || !std::isfinite(w_p)) throw ParameterError("kernel: w_p must be > 0");
    if (!std::isfinite(center_offset_j) || !std::isfinite(center_offset_k)) {
      throw ParameterError("kernel: centre offsets must be finite");
    }
  }
};

// |f_jk|^2 as a dense pixels_per_half x pixels_per_half matrix; row j is a
// pixel of half 1, column c is pixel k = pixels_per_half + c of half 2.
class CorrelationKernel {
 public:
  CorrelationKernel(KernelParams params, std::vector<double> weights)
      : params_(std::move(params)), weights_(std::move(weights)) {}

  [[nodiscard]] const KernelParams& params() const { return params_; }
  [[nodiscard]] int size() const { return params_.geometry.pixels_per_half; }
  [[nodiscard]] double weight(int j, int c) const {
    return weights_[static_cast<std::size_t>(j) * size() + c];
  }
  [[nodiscard]] const std::vector<double>& weights() const { return weights_; }

  [[nodiscard]] double total() const {
    double sum = 0.0;
    double comp = 0.0;
    for (double w : weights_) {
      const double t = sum + w;
      comp += std::abs(sum) >= std::abs(w) ? (sum - t) + w : (w - t) + sum;
      sum = t;
    }
    return sum + comp;
  }

 private:
  KernelParams params_;
  std::vector<double> weights_;
};

inline CorrelationKernel build_kernel(const KernelParams& params) {
  params.validate();
  const MaskGeometry& g = params.geometry;
  const int N = g.pixels_per_half;
  const double cj = g.j0 + params.center_offset_j;
  const double ck = g.k0 + params.center_offset_k;
  const double wcp_n = std::pow(params.w_cp, params.order);
  const double wp2 = params.w_p * params.w_p;

  std::vector<double> marginal_k(N);
  for (int c = 0; c < N; ++c) {
    const double b = (N + c) - ck;
    marginal_k[c] = -2.0 * b * b / wp2;
  }
  std::vector<double> w(static_cast<std::size_t>(N) * N);
  for (int j = 0; j < N; ++j) {
    const double a = j - cj;
    const double ga = -2.0 * a * a / wp2;
    for (int c = 0; c < N; ++c) {
      const double b = (N + c) - ck;
      const double u = std::abs(a - b);
      w[static_cast<std::size_t>(j) * N + c] =
          std::exp(-2.0 * std::pow(u, params.order) / wcp_n + ga + marginal_k[c]);
    }
  }
  CorrelationKernel raw(params, std::move(w));
  const double norm = raw.total();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw NumericalError("kernel: normalization underflowed (beam centre far off the mask?)");
  }
  std::vector<double> normalized = raw.weights();
  for (double& x : normalized) x /= norm;
  return CorrelationKernel(params, std::move(normalized));
}

// One contiguous run of field offsets driven by a single phase source.
struct FieldBlock {
  int begin = 0;  // offset index, inclusive
  int end = 0;    // exclusive
  std::size_t source = 0;
  int sign = 1;   // +1, -1 or 0
};

// Noise phase phi(delta, t) over the pixels_per_half field offsets. Each
// offset index reads sign * source_phase(source, t); sources are independent
// RTN trajectories (or static values for calibration masks). The phase
// actually imprinted on a photon is imprint_factor * phi; the RTN fields use
// 2 so that a shared field gives <exp(4 i phi)> and split fields
// <exp(2 i phi)>^2, matching the sigma_z coupling of each qubit.
class PhaseField {
 public:
  PhaseField(MaskGeometry geometry, std::vector<double> times, int n_rep, double imprint_factor,
             std::vector<rtn::Trajectory> trajectories, std::vector<FieldBlock> blocks,
             std::vector<double> source_phase)
      : geometry_(geometry),
        times_(std::move(times)),
        n_rep_(n_rep),
        imprint_factor_(imprint_factor),
        trajectories_(std::move(trajectories)),
        blocks_(std::move(blocks)),
        source_phase_(std::move(source_phase)) {
    const int N = geometry_.pixels_per_half;
    pixel_source_.assign(N, 0);
    pixel_sign_.assign(N, 0);
    std::vector<bool> covered(N, false);
    for (const FieldBlock& b : blocks_) {
      for (int i = b.begin; i < b.end; ++i) {
        if (i < 0 || i >= N || covered[i]) throw StructuralError("phase field: blocks overlap or overflow");
        covered[i] = true;
        pixel_source_[i] = b.source;
        pixel_sign_[i] = b.sign;
      }
    }
    if (std::find(covered.begin(), covered.end(), false) != covered.end()) {
      throw StructuralError("phase field: blocks do not cover every offset");
    }
    if (source_phase_.size() != source_count() * times_.size()) {
      throw StructuralError("phase field: source phase table has the wrong size");
    }
  }

  [[nodiscard]] const MaskGeometry& geometry() const { return geometry_; }
  [[nodiscard]] const std::vector<double>& times() const { return times_; }
  [[nodiscard]] int n_rep() const { return n_rep_; }
  [[nodiscard]] double imprint_factor() const { return imprint_factor_; }
  [[nodiscard]] const std::vector<rtn::Trajectory>& trajectories() const { return trajectories_; }
  [[nodiscard]] const std::vector<FieldBlock>& blocks() const { return blocks_; }
  [[nodiscard]] int offsets() const { return geometry_.pixels_per_half; }
  [[nodiscard]] std::size_t source_count() const {
    std::size_t n = 0;
    for (const FieldBlock& b : blocks_) n = std::max(n, b.source + 1);
    return n;
  }
  [[nodiscard]] std::size_t source_of(int offset_index) const { return pixel_source_[offset_index]; }
  [[nodiscard]] int sign_of(int offset_index) const { return pixel_sign_[offset_index]; }

  // phi at offset delta = offset_index + first_offset(), time index ti.
  [[nodiscard]] double phi(int offset_index, std::size_t ti) const {
    const double s = source_phase_[pixel_source_[offset_index] * times_.size() + ti];
    return pixel_sign_[offset_index] * s;
  }

 private:
  MaskGeometry geometry_;
  std::vector<double> times_;
  int n_rep_ = 1;
  double imprint_factor_ = 2.0;
  std::vector<rtn::Trajectory> trajectories_;
  std::vector<FieldBlock> blocks_;
  std::vector<double> source_phase_;
  std::vector<std::size_t> pixel_source_;
  std::vector<int> pixel_sign_;
};

inline constexpr double kRtnImprintFactor = 2.0;

namespace detail {

// Balanced layout. Full blocks are paired inside runs of four as (b, b+2),
// so a block and its mirror are never neighbours and a shift of up to one
// block never lines a block up with its own mirror. Leftover full blocks pair
// with their neighbour. A remaining unpaired run of pixels is split in two
// mirrored halves with a zero-phase middle pixel when its length is odd, so
// that the offset sum of phi vanishes exactly.
inline std::vector<FieldBlock> balanced_blocks(int N, int n_rep, std::size_t& n_sources) {
  std::vector<FieldBlock> blocks;
  const int full = N / n_rep;
  std::size_t src = 0;
  int b = 0;
  for (; b + 4 <= full; b += 4) {
    const std::size_t s0 = src++;
    const std::size_t s1 = src++;
    blocks.push_back({(b + 0) * n_rep, (b + 1) * n_rep, s0, +1});
    blocks.push_back({(b + 1) * n_rep, (b + 2) * n_rep, s1, +1});
    blocks.push_back({(b + 2) * n_rep, (b + 3) * n_rep, s0, -1});
    blocks.push_back({(b + 3) * n_rep, (b + 4) * n_rep, s1, -1});
  }
  for (; b + 2 <= full; b += 2) {
    const std::size_t s = src++;
    blocks.push_back({(b + 0) * n_rep, (b + 1) * n_rep, s, +1});
    blocks.push_back({(b + 1) * n_rep, (b + 2) * n_rep, s, -1});
  }
  const int rest_begin = b * n_rep;
  const int rest = N - rest_begin;
  if (rest > 0) {
    const std::size_t s = src++;
    const int half = rest / 2;
    if (half > 0) blocks.push_back({rest_begin, rest_begin + half, s, +1});
    if (rest % 2 == 1) blocks.push_back({rest_begin + half, rest_begin + half + 1, s, 0});
    if (half > 0) blocks.push_back({N - half, N, s, -1});
  }
  n_sources = src;
  return blocks;
}

inline std::vector<double> trajectory_phase_table(const std::vector<rtn::Trajectory>& trajectories,
                                                  const std::vector<double>& times) {
  std::vector<double> table(trajectories.size() * times.size());
  for (std::size_t s = 0; s < trajectories.size(); ++s) {
    const std::vector<double> phi = rtn::phases_on_grid(trajectories[s], times);
    std::copy(phi.begin(), phi.end(), table.begin() + static_cast<std::ptrdiff_t>(s * times.size()));
  }
  return table;
}

}  // namespace detail

// Block b covers offset indices [b n_rep, (b+1) n_rep); the last block is
// truncated when n_rep does not divide pixels_per_half. Source s draws from
// substream s of the seed.
inline PhaseField build_phase_field(double gamma, const std::vector<double>& times, int n_rep,
                                    const MaskGeometry& geometry, const SeedSpec& seed,
                                    bool balanced, double initial_plus_probability = 0.5) {
  geometry.validate();
  require_time_grid(times);
  if (n_rep < 1) throw ParameterError("phase field: n_rep must be >= 1");
  const int N = geometry.pixels_per_half;
  if (n_rep > N) throw ParameterError("phase field: n_rep exceeds the mask half");

  std::vector<FieldBlock> blocks;
  std::size_t n_sources = 0;
  if (balanced) {
    blocks = detail::balanced_blocks(N, n_rep, n_sources);
  } else {
    for (int begin = 0; begin < N; begin += n_rep) {
      blocks.push_back({begin, std::min(N, begin + n_rep), n_sources++, +1});
    }
  }

  rtn::RtnParams params;
  params.gamma = gamma;
  params.t_max = times.empty() || times.back() <= 0.0 ? 1.0 : times.back();
  params.initial_plus_probability = initial_plus_probability;
  std::vector<rtn::Trajectory> trajectories;
  trajectories.reserve(n_sources);
  for (std::size_t s = 0; s < n_sources; ++s) {
    trajectories.push_back(rtn::sample_trajectory(params, seed.with_substream(static_cast<std::uint32_t>(s))));
  }
  std::vector<double> table = detail::trajectory_phase_table(trajectories, times);
  return PhaseField(geometry, times, n_rep, kRtnImprintFactor, std::move(trajectories),
                    std::move(blocks), std::move(table));
}

// Time-independent field with one phase value per offset (imprinted as is).
inline PhaseField static_phase_field(const MaskGeometry& geometry, const std::vector<double>& times,
                                     const std::vector<double>& offset_phases) {
  geometry.validate();
  const int N = geometry.pixels_per_half;
  if (static_cast<int>(offset_phases.size()) != N) {
    throw StructuralError("static field: need one phase per offset");
  }
  std::vector<FieldBlock> blocks;
  std::vector<double> table;
  table.reserve(static_cast<std::size_t>(N) * times.size());
  for (int i = 0; i < N; ++i) {
    blocks.push_back({i, i + 1, static_cast<std::size_t>(i), +1});
    table.insert(table.end(), times.size(), offset_phases[i]);
  }
  return PhaseField(geometry, times, 1, 1.0, {}, std::move(blocks), std::move(table));
}

// +-amplitude square wave switching every n_r offsets.
inline PhaseField rectangular_field(const MaskGeometry& geometry, int n_r, double amplitude,
                                    const std::vector<double>& times) {
  if (n_r < 1) throw ParameterError("rectangular field: n_r must be >= 1");
  std::vector<double> phases(geometry.pixels_per_half);
  for (int i = 0; i < geometry.pixels_per_half; ++i) {
    phases[i] = ((i / n_r) % 2 == 0) ? amplitude : -amplitude;
  }
  return static_phase_field(geometry, times, phases);
}

// Offsets that fall off the field (shifted beyond the mask) contribute zero;
// the kernel is not renormalized for that evaluation.
inline CoherenceSeries gamma_delta(const CorrelationKernel& kernel, const PhaseField& field1,
                                   const PhaseField& field2, int delta,
                                   const std::vector<double>& times) {
  const MaskGeometry& g = kernel.params().geometry;
  if (!(field1.geometry() == g) || !(field2.geometry() == g)) {
    throw StructuralError("gamma_delta: kernel and phase fields use different mask geometries");
  }
  if (field1.times() != times || field2.times() != times) {
    throw StructuralError("gamma_delta: phase fields are sampled on a different time grid");
  }
  const int N = g.pixels_per_half;
  const int half = N / 2;
  const std::size_t T = times.size();

  CoherenceSeries out;
  out.times = times;
  out.provenance = Provenance::kernel_sum;
  out.values.assign(T, Complex{0.0, 0.0});
  out.params = {{"delta", static_cast<double>(delta)},
                {"w_cp", kernel.params().w_cp},
                {"w_p", kernel.params().w_p},
                {"order", static_cast<double>(kernel.params().order)},
                {"n_rep", static_cast<double>(field1.n_rep())}};

  // Field offset index read by each pixel (or -1 when off the field).
  std::vector<int> idx1(N);
  std::vector<int> idx2(N);
  for (int j = 0; j < N; ++j) {
    const int i = j - g.j0 + half;
    idx1[j] = (i >= 0 && i < N) ? i : -1;
  }
  for (int c = 0; c < N; ++c) {
    const long i = static_cast<long>(N) + c + delta - g.k0 + half;
    idx2[c] = (i >= 0 && i < N) ? static_cast<int>(i) : -1;
  }

  const std::vector<double>& W = kernel.weights();
  parallel_for(T, [&](std::size_t ti) {
    std::vector<Complex> b(N);
    for (int c = 0; c < N; ++c) {
      b[c] = idx2[c] < 0 ? Complex{0.0, 0.0}
                         : std::polar(1.0, field2.imprint_factor() * field2.phi(idx2[c], ti));
    }
    Complex total{0.0, 0.0};
    for (int j = 0; j < N; ++j) {
      if (idx1[j] < 0) continue;
      const double* row = W.data() + static_cast<std::size_t>(j) * N;
      double re = 0.0;
      double im = 0.0;
      for (int c = 0; c < N; ++c) {
        re += row[c] * b[c].real();
        im += row[c] * b[c].imag();
      }
      total += std::polar(1.0, field1.imprint_factor() * field1.phi(idx1[j], ti)) * Complex{re, im};
    }
    out.values[ti] = total;
  });
  return out;
}

struct FieldSettings {
  double gamma = 0.0;
  int n_rep = 3;
  bool balanced = true;
  double initial_plus_probability = 0.5;
  std::vector<double> times = default_time_grid();
  SeedSpec seed{};
};

// delta sweep: one phase field shared by both halves (phi1 = phi2 = phi), so
// delta = 0 correlates the environments fully and delta >= n_rep decouples
// them. The same field is reused for every delta.
inline std::vector<CoherenceSeries> transition_sweep_delta(const FieldSettings& field,
                                                           const std::vector<int>& deltas,
                                                           const KernelParams& kernel_params) {
  if (deltas.empty()) return {};
  const CorrelationKernel kernel = build_kernel(kernel_params);
  const PhaseField phi = build_phase_field(field.gamma, field.times, field.n_rep,
                                           kernel_params.geometry, field.seed, field.balanced,
                                           field.initial_plus_probability);
  std::vector<CoherenceSeries> out;
  out.reserve(deltas.size());
  for (int delta : deltas) {
    if (std::abs(delta) >= kernel_params.geometry.pixels_per_half) {
      throw RangeError("delta sweep: |delta| = " + std::to_string(std::abs(delta)) +
                       " shifts the field off the mask");
    }
    CoherenceSeries s = gamma_delta(kernel, phi, phi, delta, field.times);
    s.params["gamma"] = field.gamma;
    out.push_back(std::move(s));
  }
  return out;
}

// Spectral sweep: delta = 0 and a shared field; for each spectral width the
// kernel is rebuilt with w_cp and order from the optics table.
inline std::vector<CoherenceSeries> transition_sweep_spectral(
    const FieldSettings& field, const std::vector<double>& spectral_widths_nm,
    const WcpTable& optics, const KernelParams& base_kernel) {
  if (spectral_widths_nm.empty()) return {};
  std::vector<WcpLookup> widths;
  for (double dl : spectral_widths_nm) widths.push_back(optics.lookup(dl));
  const PhaseField phi = build_phase_field(field.gamma, field.times, field.n_rep,
                                           base_kernel.geometry, field.seed, field.balanced,
                                           field.initial_plus_probability);
  std::vector<CoherenceSeries> out;
  out.reserve(widths.size());
  for (std::size_t i = 0; i < widths.size(); ++i) {
    KernelParams kp = base_kernel;
    kp.w_cp = widths[i].w_cp;
    kp.order = widths[i].order;
    CoherenceSeries s = gamma_delta(build_kernel(kp), phi, phi, 0, field.times);
    s.params["gamma"] = field.gamma;
    s.params["dlambda_nm"] = spectral_widths_nm[i];
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ltg::slm
