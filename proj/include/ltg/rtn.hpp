#pragma once

// Random telegraph noise: X(t) = +-1 flipping at Poisson rate gamma, so that
// <X(t)X(0)> = exp(-2 gamma t). Trajectories are stored as exact jump times
// and phases phi(t) = int_0^t X(s) ds are integrated without time stepping.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ltg/errors.hpp"
#include "ltg/parallel.hpp"
#include "ltg/random.hpp"
#include "ltg/series.hpp"

namespace ltg::rtn {

struct RtnParams {
  double gamma = 0.0;
  double t_max = 1.0;
  // Probability that X(0) = +1. The stationary ensemble uses 0.5.
  double initial_plus_probability = 0.5;

  void validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
      throw ParameterError("rtn: switching rate gamma must be finite and >= 0");
    }
    if (!(t_max > 0.0) || !std::isfinite(t_max)) {
      throw ParameterError("rtn: horizon t_max must be finite and > 0");
    }
    if (!(initial_plus_probability >= 0.0 && initial_plus_probability <= 1.0)) {
      throw ParameterError("rtn: initial_plus_probability must lie in [0, 1]");
    }
  }
};

class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(int initial_sign, std::vector<double> jump_times, double t_max)
      : initial_sign_(initial_sign), jump_times_(std::move(jump_times)), t_max_(t_max) {
    if (initial_sign != 1 && initial_sign != -1) {
      throw ParameterError("trajectory initial sign must be +1 or -1");
    }
    for (std::size_t i = 0; i < jump_times_.size(); ++i) {
      const double t = jump_times_[i];
      if (!(t > 0.0 && t <= t_max_)) {
        throw ParameterError("trajectory jump times must lie in (0, t_max]");
      }
      if (i > 0 && !(t > jump_times_[i - 1])) {
        throw ParameterError("trajectory jump times must be strictly increasing");
      }
    }
  }

  [[nodiscard]] int initial_sign() const { return initial_sign_; }
  [[nodiscard]] const std::vector<double>& jump_times() const { return jump_times_; }
  [[nodiscard]] double t_max() const { return t_max_; }
  [[nodiscard]] std::size_t jump_count() const { return jump_times_.size(); }

  // X(t) = initial_sign * (-1)^{#jumps <= t}.
  [[nodiscard]] int value(double t) const {
    const auto flips = std::upper_bound(jump_times_.begin(), jump_times_.end(), t) -
                       jump_times_.begin();
    return (flips % 2 == 0) ? initial_sign_ : -initial_sign_;
  }

  // X -> -X; the jump times are shared, so phi flips sign exactly.
  [[nodiscard]] Trajectory mirrored() const {
    Trajectory m = *this;
    m.initial_sign_ = -initial_sign_;
    return m;
  }

 private:
  int initial_sign_ = 1;
  std::vector<double> jump_times_;
  double t_max_ = 1.0;
};

struct PhaseSample {
  double t = 0.0;
  double phi = 0.0;
};

inline Trajectory sample_trajectory(const RtnParams& params, const SeedSpec& seed) {
  params.validate();
  RngStream rng(seed);
  const int sign = rng.uniform() < params.initial_plus_probability ? 1 : -1;
  std::vector<double> jumps;
  if (params.gamma > 0.0) {
    double t = rng.exponential(params.gamma);
    while (t <= params.t_max) {
      jumps.push_back(t);
      t += rng.exponential(params.gamma);
    }
  }
  return Trajectory(sign, std::move(jumps), params.t_max);
}

namespace detail {

// Integral of the +1-started square wave; the caller applies the sign so a
// mirrored trajectory yields exactly -phi.
class UnsignedPhaseSweep {
 public:
  explicit UnsignedPhaseSweep(const std::vector<double>& jumps) : jumps_(jumps) {}

  // Requires non-decreasing t across calls.
  double at(double t) {
    while (next_ < jumps_.size() && jumps_[next_] <= t) {
      prefix_ += level_ * (jumps_[next_] - last_);
      last_ = jumps_[next_];
      level_ = -level_;
      ++next_;
    }
    return prefix_ + level_ * (t - last_);
  }

 private:
  const std::vector<double>& jumps_;
  std::size_t next_ = 0;
  double prefix_ = 0.0;
  double last_ = 0.0;
  double level_ = 1.0;
};

}  // namespace detail

inline PhaseSample accumulate_phase(const Trajectory& traj, double t) {
  if (!(t >= 0.0 && t <= traj.t_max())) {
    throw RangeError("accumulate_phase: t = " + std::to_string(t) +
                     " outside [0, t_max = " + std::to_string(traj.t_max()) + "]");
  }
  detail::UnsignedPhaseSweep sweep(traj.jump_times());
  return {t, traj.initial_sign() * sweep.at(t)};
}

// phi at every grid time; bit-identical to calling accumulate_phase per time.
inline std::vector<double> phases_on_grid(const Trajectory& traj, std::span<const double> times) {
  std::vector<double> out(times.size());
  detail::UnsignedPhaseSweep sweep(traj.jump_times());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0 && times[i] <= traj.t_max())) {
      throw RangeError("phases_on_grid: grid time outside [0, t_max]");
    }
    if (i > 0 && times[i] < times[i - 1]) throw RangeError("phases_on_grid: grid not ascending");
    out[i] = traj.initial_sign() * sweep.at(times[i]);
  }
  return out;
}

inline constexpr std::size_t kReductionChunk = 512;

// (1/n) sum_r exp(i m phi_r(t)). Realization r draws from substream r of the
// given (master_seed, stream_index); with antithetic set, realization 2i+1 is
// the mirror of 2i. Partial sums over fixed chunks are combined in ascending
// realization order, so the result does not depend on the thread count.
inline CoherenceSeries mc_exponential_moment(const RtnParams& params, int m,
                                             const std::vector<double>& times,
                                             std::size_t n_real, const SeedSpec& seed,
                                             bool antithetic) {
  if (m < 1) throw ParameterError("mc_exponential_moment: moment order m must be >= 1");
  if (n_real < 2) throw ParameterError("mc_exponential_moment: need at least 2 realizations");
  if (antithetic && n_real % 2 != 0) {
    throw ParameterError("mc_exponential_moment: antithetic pairing needs an even n_real");
  }
  if (n_real > (std::size_t{1} << 32)) {
    throw ParameterError("mc_exponential_moment: n_real exceeds the substream range");
  }
  require_time_grid(times);
  RtnParams p = params;
  if (!times.empty()) p.t_max = std::max(params.t_max, times.back());
  if (!(p.t_max > 0.0)) p.t_max = 1.0;
  p.validate();

  const std::size_t T = times.size();
  // One independent sample is a realization, or a mirrored pair mean.
  const std::size_t n_samples = antithetic ? n_real / 2 : n_real;
  const std::size_t n_chunks = (n_samples + kReductionChunk - 1) / kReductionChunk;
  std::vector<std::vector<double>> partial(n_chunks);
  const double fm = static_cast<double>(m);

  parallel_for(n_chunks, [&](std::size_t c) {
    std::vector<double> acc(4 * T, 0.0);
    const std::size_t begin = c * kReductionChunk;
    const std::size_t end = std::min(n_samples, begin + kReductionChunk);
    for (std::size_t s = begin; s < end; ++s) {
      const Trajectory traj = sample_trajectory(p, seed.with_substream(static_cast<std::uint32_t>(s)));
      const std::vector<double> phi = phases_on_grid(traj, times);
      for (std::size_t k = 0; k < T; ++k) {
        const double re = std::cos(fm * phi[k]);
        const double im = std::sin(fm * phi[k]);
        double x = re;
        double y = im;
        if (antithetic) {
          // exp(i m phi) + exp(-i m phi), averaged.
          x = 0.5 * (re + re);
          y = 0.5 * (im + (-im));
        }
        acc[4 * k + 0] += x;
        acc[4 * k + 1] += y;
        acc[4 * k + 2] += x * x;
        acc[4 * k + 3] += y * y;
      }
    }
    partial[c] = std::move(acc);
  });

  std::vector<double> total(4 * T, 0.0);
  for (const auto& acc : partial) {
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += acc[i];
  }

  CoherenceSeries out;
  out.times = times;
  out.provenance = Provenance::monte_carlo;
  out.params = {{"gamma", params.gamma},
                {"m", fm},
                {"n_real", static_cast<double>(n_real)},
                {"antithetic", antithetic ? 1.0 : 0.0},
                {"initial_plus_probability", params.initial_plus_probability}};
  out.values.resize(T);
  out.std_error_re.resize(T);
  out.std_error_im.resize(T);
  const double n = static_cast<double>(n_samples);
  for (std::size_t k = 0; k < T; ++k) {
    const double mean_re = total[4 * k + 0] / n;
    const double mean_im = total[4 * k + 1] / n;
    out.values[k] = {mean_re, mean_im};
    if (n_samples >= 2) {
      const double var_re = std::max(0.0, (total[4 * k + 2] - n * mean_re * mean_re) / (n - 1.0));
      const double var_im = std::max(0.0, (total[4 * k + 3] - n * mean_im * mean_im) / (n - 1.0));
      out.std_error_re[k] = std::sqrt(var_re / n);
      out.std_error_im[k] = std::sqrt(var_im / n);
    }
  }
  return out;
}

// sum_r w_r exp(i m phi_r(t)) / sum_r w_r over an explicit trajectory set.
// Used to compare kernel sums against moments of the same realizations.
inline CoherenceSeries weighted_exponential_moment(std::span<const Trajectory> trajectories,
                                                   std::span<const double> weights, int m,
                                                   const std::vector<double>& times) {
  if (trajectories.size() != weights.size()) {
    throw StructuralError("weighted_exponential_moment: weights/trajectories size mismatch");
  }
  require_time_grid(times);
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ParameterError("weighted_exponential_moment: negative weight");
    wsum += w;
  }
  if (!(wsum > 0.0)) throw ParameterError("weighted_exponential_moment: zero total weight");
  CoherenceSeries out;
  out.times = times;
  out.provenance = Provenance::monte_carlo;
  out.values.assign(times.size(), Complex{0.0, 0.0});
  out.params = {{"m", static_cast<double>(m)}};
  for (std::size_t r = 0; r < trajectories.size(); ++r) {
    if (weights[r] == 0.0) continue;
    const std::vector<double> phi = phases_on_grid(trajectories[r], times);
    for (std::size_t k = 0; k < times.size(); ++k) {
      out.values[k] += weights[r] * std::polar(1.0, static_cast<double>(m) * phi[k]);
    }
  }
  for (auto& v : out.values) v /= wsum;
  return out;
}

}  // namespace ltg::rtn
