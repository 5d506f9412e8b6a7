#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bsg/selection.hpp"

namespace bsg {

/// Point of the station simplex: the fraction of players at each station.
struct FractionVector {
  std::vector<double> x;
};

inline void validate(const FractionVector& fractions, int num_stations) {
  if (fractions.x.size() != static_cast<std::size_t>(num_stations)) {
    throw std::invalid_argument("FractionVector: size must equal num_stations");
  }
  double sum = 0.0;
  for (double v : fractions.x) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("FractionVector: entries must be >= 0");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("FractionVector: entries must sum to 1");
  }
}

/// Rescaled potential of the non-atomic limit as a function of the fractions:
///   sum_s w_s log2(N0 * alpha_s + x_s * p_max * gain_mean)
/// with alpha_s = B_s / K the per-player bandwidth of station s. gain_mean is
/// the mean of the gain distribution (1 for the unit-mean channel model).
inline double nonatomic_potential(const FractionVector& fractions,
                                  const NetworkParams& params,
                                  double gain_mean = 1.0) {
  validate(fractions, params.num_stations);
  if (!(gain_mean > 0.0)) {
    throw std::invalid_argument("nonatomic_potential: gain_mean must be > 0");
  }
  double value = 0.0;
  for (int s = 0; s < params.num_stations; ++s) {
    const auto su = static_cast<std::size_t>(s);
    const double alpha_s = params.bandwidth_fractions[su] *
                           params.total_bandwidth / params.num_players;
    value += params.bandwidth_fractions[su] *
             std::log2(params.noise_density * alpha_s +
                       fractions.x[su] * params.max_power * gain_mean);
  }
  return value;
}

struct NonatomicEquilibrium {
  FractionVector fractions;        // x_s = w_s, the unique maximizer
  double optimum_value = 0.0;      // rescaled potential at the equilibrium
  double bandwidth_per_player = 0; // alpha = B / K of the finite instance
  std::vector<double> station_bandwidth_per_player;  // alpha_s = B_s / K
};

/// Equilibrium fractions of the non-atomic selection game: the fraction of
/// players at station s equals its bandwidth share w_s.
inline NonatomicEquilibrium nonatomic_equilibrium_fractions(
    const NetworkParams& params, double gain_mean = 1.0) {
  NonatomicEquilibrium eq;
  eq.fractions.x = params.bandwidth_fractions;
  eq.optimum_value = nonatomic_potential(eq.fractions, params, gain_mean);
  eq.bandwidth_per_player = params.total_bandwidth / params.num_players;
  for (double w : params.bandwidth_fractions) {
    eq.station_bandwidth_per_player.push_back(
        w * params.total_bandwidth / params.num_players);
  }
  return eq;
}

struct EmpiricalFractions {
  FractionVector mean;            // average station occupancy over trials
  std::vector<double> std_error;  // per-station standard error
  int trials = 0;
};

/// Monte-Carlo estimate of the selection-game outcome: per trial draws a
/// fresh channel, runs the dynamics from a random start under a random
/// schedule, and averages the per-station occupancy |K_s| / K of the
/// terminal equilibrium. Streams: trial root = derive_seed(seed, {trial, t}),
/// then start/schedule substreams.
inline EmpiricalFractions empirical_fractions(const NetworkParams& params,
                                              RngSeed seed, int trials) {
  if (trials < 1) {
    throw std::invalid_argument("empirical_fractions: trials must be >= 1");
  }
  const auto cols = static_cast<std::size_t>(params.num_stations);
  std::vector<double> sum(cols, 0.0);
  std::vector<double> sum_sq(cols, 0.0);
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t trial_root =
        derive_seed(seed.value, {stream::trial, static_cast<std::uint64_t>(t)});
    const auto gains = draw_channels(params, {trial_root});
    const auto start = random_selection_profile(
        params, derive_seed(trial_root, {stream::start}));
    const auto run = run_selection_dynamics(
        gains, params, start,
        UpdateSchedule::random(derive_seed(trial_root, {stream::schedule})));
    std::vector<int> counts(cols, 0);
    for (int a : run.profile.assignment) {
      ++counts[static_cast<std::size_t>(a)];
    }
    for (std::size_t s = 0; s < cols; ++s) {
      const double frac = static_cast<double>(counts[s]) / params.num_players;
      sum[s] += frac;
      sum_sq[s] += frac * frac;
    }
  }

  EmpiricalFractions result;
  result.trials = trials;
  result.mean.x.resize(cols);
  result.std_error.assign(cols, 0.0);
  for (std::size_t s = 0; s < cols; ++s) {
    const double mean = sum[s] / trials;
    result.mean.x[s] = mean;
    if (trials > 1) {
      const double var =
          std::max(0.0, (sum_sq[s] - trials * mean * mean) / (trials - 1));
      result.std_error[s] = std::sqrt(var / trials);
    }
  }
  return result;
}

// --- mixed-strategy extension ----------------------------------------------

/// K rows, each a probability distribution over the stations.
struct MixedProfile {
  Matrix<double> q;
};

inline void validate(const MixedProfile& mixed, const NetworkParams& params) {
  if (mixed.q.rows() != static_cast<std::size_t>(params.num_players) ||
      mixed.q.cols() != static_cast<std::size_t>(params.num_stations)) {
    throw std::invalid_argument("MixedProfile: dimensions do not match params");
  }
  for (std::size_t k = 0; k < mixed.q.rows(); ++k) {
    double sum = 0.0;
    for (double v : mixed.q.row(k)) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("MixedProfile: entries must be >= 0");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("MixedProfile: rows must sum to 1");
    }
  }
}

/// Embeds a pure selection profile as a degenerate mixed profile.
inline MixedProfile degenerate_mixed(const SelectionProfile& profile,
                                     const NetworkParams& params) {
  MixedProfile mixed{Matrix<double>(
      static_cast<std::size_t>(params.num_players),
      static_cast<std::size_t>(params.num_stations), 0.0)};
  for (std::size_t k = 0; k < profile.assignment.size(); ++k) {
    mixed.q(k, static_cast<std::size_t>(profile.assignment[k])) = 1.0;
  }
  return mixed;
}

namespace detail {

/// Expectation over the product distribution of a per-profile value; exact
/// summation over all S^K pure profiles, skipping zero-probability branches.
template <typename Value>
double mixed_expectation(const MixedProfile& mixed, const ChannelMatrix& gains,
                         const NetworkParams& params,
                         const EnumerationLimits& limits, Value&& value) {
  const auto count = try_profile_count(params.num_players, params.num_stations);
  if (!count || *count > limits.max_profiles) {
    throw EnumerationCapError(
        count.value_or(std::numeric_limits<std::uint64_t>::max()),
        limits.max_profiles);
  }
  double expectation = 0.0;
  detail::for_each_profile(
      gains, params, *count,
      [&](const SelectionProfile& profile, std::span<const double> totals) {
        double prob = 1.0;
        for (std::size_t k = 0; k < profile.assignment.size(); ++k) {
          prob *= mixed.q(k, static_cast<std::size_t>(profile.assignment[k]));
          if (prob == 0.0) return;
        }
        expectation += prob * value(profile, totals);
      });
  return expectation;
}

}  // namespace detail

/// Expected utility of player k under the product distribution q (exact sum,
/// no sampling).
inline double mixed_utility(const MixedProfile& mixed, const ChannelMatrix& gains,
                            const NetworkParams& params, int k,
                            const EnumerationLimits& limits = {}) {
  validate(mixed, params);
  return detail::mixed_expectation(
      mixed, gains, params, limits,
      [&](const SelectionProfile& profile, std::span<const double> totals) {
        return selection_utility(profile, totals, gains, params, k);
      });
}

/// Expected potential under the product distribution q; at a degenerate q it
/// equals the pure potential.
inline double mixed_potential(const MixedProfile& mixed,
                              const ChannelMatrix& gains,
                              const NetworkParams& params,
                              const EnumerationLimits& limits = {}) {
  validate(mixed, params);
  return detail::mixed_expectation(
      mixed, gains, params, limits,
      [&](const SelectionProfile&, std::span<const double> totals) {
        return selection_potential(totals, params);
      });
}

/// Sufficient condition for the 2x2 game to have no equilibrium in fully
/// mixed strategies: some player k has a station s whose alternative is so
/// weak that s strictly dominates, i.e.
///   g_{k,-s} / g_{k,s} <= sigma_{-s}^2 / (sigma_s^2 + p_max * g_{-k,s}).
inline bool no_fully_mixed_ne_2x2(const ChannelMatrix& gains,
                                  const NetworkParams& params) {
  if (params.num_players != 2 || params.num_stations != 2) {
    throw std::invalid_argument("no_fully_mixed_ne_2x2: requires K = 2, S = 2");
  }
  for (int k = 0; k < 2; ++k) {
    for (int s = 0; s < 2; ++s) {
      const auto ku = static_cast<std::size_t>(k);
      const auto su = static_cast<std::size_t>(s);
      const auto other_k = static_cast<std::size_t>(1 - k);
      const auto other_s = static_cast<std::size_t>(1 - s);
      const double lhs = gains.gains(ku, other_s) / gains.gains(ku, su);
      const double rhs =
          params.sigma2(1 - s) /
          (params.sigma2(s) + params.max_power * gains.gains(other_k, su));
      if (lhs <= rhs) return true;
    }
  }
  return false;
}

}  // namespace bsg
