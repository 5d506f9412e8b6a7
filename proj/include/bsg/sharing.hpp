#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "bsg/game.hpp"
#include "bsg/selection.hpp"

namespace bsg {

/// Result of one weighted water-filling problem. On the active set the
/// powers satisfy powers[s] = weights[s] / water_level_param - costs[s];
/// everywhere else they are zero, and the budget binds exactly.
struct WaterFillingSolution {
  std::vector<double> powers;
  double water_level_param = 0.0;  // beta of p_s = max(0, w_s / beta - c_s)
  std::vector<int> active_set;     // stations with positive power, ascending
};

/// Maximizes sum_s weights[s] * log2(p_s / costs[s] + 1) subject to p >= 0
/// and sum_s p_s = budget, by breakpoint sort. Candidate levels
/// lambda_s = weights[s] / costs[s] are visited in descending order; the
/// active set is the unique prefix whose closed-form
///   beta = sum(weights) / (budget + sum(costs))
/// keeps every prefix power strictly positive. Stations with infinite cost
/// (unusable channels) never enter; all-unusable input is an error.
inline WaterFillingSolution water_fill(std::span<const double> weights,
                                       std::span<const double> costs,
                                       double budget) {
  if (weights.size() != costs.size()) {
    throw std::invalid_argument("water_fill: weights/costs size mismatch");
  }
  if (!(budget > 0.0)) {
    throw std::invalid_argument("water_fill: budget must be positive");
  }
  std::vector<std::size_t> usable;
  for (std::size_t s = 0; s < costs.size(); ++s) {
    if (std::isfinite(costs[s])) {
      if (!(costs[s] > 0.0) || !(weights[s] > 0.0)) {
        throw std::invalid_argument(
            "water_fill: usable stations need positive weight and cost");
      }
      usable.push_back(s);
    }
  }
  if (usable.empty()) {
    throw std::invalid_argument("water_fill: no usable station");
  }
  std::sort(usable.begin(), usable.end(), [&](std::size_t a, std::size_t b) {
    return weights[a] / costs[a] > weights[b] / costs[b];
  });

  double weight_sum = 0.0;
  double cost_sum = 0.0;
  double beta = 0.0;
  std::size_t active_count = 0;
  for (std::size_t m = 0; m < usable.size(); ++m) {
    weight_sum += weights[usable[m]];
    cost_sum += costs[usable[m]];
    const double candidate = weight_sum / (budget + cost_sum);
    // the m-th level itself must stay above the water parameter, otherwise
    // station m would receive nonpositive power
    if (weights[usable[m]] / costs[usable[m]] > candidate) {
      beta = candidate;
      active_count = m + 1;
    }
  }

  WaterFillingSolution solution;
  solution.powers.assign(weights.size(), 0.0);
  solution.water_level_param = beta;
  for (std::size_t m = 0; m < active_count; ++m) {
    const std::size_t s = usable[m];
    solution.powers[s] = weights[s] / beta - costs[s];
    solution.active_set.push_back(static_cast<int>(s));
  }
  std::sort(solution.active_set.begin(), solution.active_set.end());
  return solution;
}

/// Water-filling best response of player k against the interference in
/// `profile`: costs are mai / gain per station; zero-gain stations are
/// unusable and get zero power.
inline WaterFillingSolution water_fill_best_response(
    const PowerProfile& profile, const ChannelMatrix& gains,
    const NetworkParams& params, int k) {
  const auto cols = static_cast<std::size_t>(params.num_stations);
  std::vector<double> costs(cols);
  for (int s = 0; s < params.num_stations; ++s) {
    const double g = gains.gains(static_cast<std::size_t>(k),
                                 static_cast<std::size_t>(s));
    costs[static_cast<std::size_t>(s)] =
        g > 0.0 ? mai(profile, gains, params, k, s) / g
                : std::numeric_limits<double>::infinity();
  }
  return water_fill(params.bandwidth_fractions, costs, params.max_power);
}

/// Violation of player k's optimality system in the given profile:
/// stationarity on loaded stations, dual feasibility on unloaded ones,
/// budget binding, and complementary slackness. The player's multiplier is
/// recovered as the marginal utility on its most loaded station. A row that
/// water-fills the current interference has residual at the numerical floor.
inline double kkt_residual_player(const PowerProfile& profile,
                                  const ChannelMatrix& gains,
                                  const NetworkParams& params, int k) {
  const auto ku = static_cast<std::size_t>(k);
  double budget_used = 0.0;
  int most_loaded = -1;
  for (int s = 0; s < params.num_stations; ++s) {
    const double p = profile.p(ku, static_cast<std::size_t>(s));
    budget_used += p;
    if (p > 0.0 && (most_loaded < 0 ||
                    p > profile.p(ku, static_cast<std::size_t>(most_loaded)))) {
      most_loaded = s;
    }
  }
  double residual = std::abs(budget_used - params.max_power);

  auto marginal = [&](int s) {
    const auto su = static_cast<std::size_t>(s);
    const double g = gains.gains(ku, su);
    const double zeta = mai(profile, gains, params, k, s);
    return params.bandwidth_fractions[su] * g /
           ((profile.p(ku, su) * g + zeta) * std::numbers::ln2);
  };

  double multiplier = 0.0;
  if (most_loaded >= 0) {
    multiplier = marginal(most_loaded);
  } else {
    for (int s = 0; s < params.num_stations; ++s) {
      multiplier = std::max(multiplier, marginal(s));
    }
  }
  for (int s = 0; s < params.num_stations; ++s) {
    const double p = profile.p(ku, static_cast<std::size_t>(s));
    const double value = marginal(s);
    if (p > 0.0) {
      residual = std::max(residual, std::abs(value - multiplier));
    } else {
      residual = std::max(residual, value - multiplier);
    }
    residual = std::max(residual, std::abs((multiplier - value) * p));
  }
  return residual;
}

/// Maximum of kkt_residual_player over all players: zero exactly at the
/// mutual-best-response fixed point, the unique equilibrium.
inline double kkt_residual(const PowerProfile& profile,
                           const ChannelMatrix& gains,
                           const NetworkParams& params) {
  double residual = 0.0;
  for (int k = 0; k < params.num_players; ++k) {
    residual = std::max(residual, kkt_residual_player(profile, gains, params, k));
  }
  return residual;
}

/// One logged update of the sharing dynamics.
struct SharingStep {
  std::uint64_t update = 0;
  int player = -1;
  double potential = 0.0;
  double row_change = 0.0;  // max-norm change of the updated row
};

struct SharingRun {
  PowerProfile profile;
  std::vector<SharingStep> log;
  std::uint64_t sweeps = 0;  // completed blocks of K updates
};

class SharingConvergenceError : public std::runtime_error {
 public:
  SharingConvergenceError(std::string message, std::vector<SharingStep> log)
      : std::runtime_error(std::move(message)), log_(std::move(log)) {}
  const std::vector<SharingStep>& log() const { return log_; }

 private:
  std::vector<SharingStep> log_;
};

/// Gauss-Seidel best-response dynamics: one player at a time replaces its row
/// with the water-filling best response against current interference. Stops
/// once every player's update moved its row by less than epsilon in max-norm
/// since the last larger change (for round robin this is a full quiet sweep).
/// The potential never decreases along the run.
inline SharingRun run_sharing_dynamics(const ChannelMatrix& gains,
                                       const NetworkParams& params,
                                       const PowerProfile& start,
                                       const UpdateSchedule& schedule,
                                       double epsilon = 1e-9,
                                       std::uint64_t max_sweeps = 10'000) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("run_sharing_dynamics: epsilon must be > 0");
  }
  if (max_sweeps < 1) {
    throw std::invalid_argument("run_sharing_dynamics: max_sweeps must be >= 1");
  }
  validate(start, params);

  const auto num_players = static_cast<std::size_t>(params.num_players);
  SharingRun run;
  run.profile = start;
  SplitMix64 picker(schedule.seed);

  run.log.push_back({0, -1, potential(run.profile, gains, params), 0.0});

  std::vector<bool> quiet(num_players, false);
  std::size_t quiet_count = 0;
  std::size_t next_round_robin = 0;
  const std::uint64_t max_updates = max_sweeps * num_players;

  for (std::uint64_t update = 1; update <= max_updates; ++update) {
    std::size_t k;
    if (schedule.kind == ScheduleKind::round_robin) {
      k = next_round_robin;
      next_round_robin = (next_round_robin + 1) % num_players;
    } else {
      k = static_cast<std::size_t>(picker.below(num_players));
    }

    const auto response = water_fill_best_response(run.profile, gains, params,
                                                   static_cast<int>(k));
    double change = 0.0;
    for (std::size_t s = 0; s < response.powers.size(); ++s) {
      change = std::max(change,
                        std::abs(response.powers[s] - run.profile.p(k, s)));
      run.profile.p(k, s) = response.powers[s];
    }
    if (change >= epsilon) {
      std::fill(quiet.begin(), quiet.end(), false);
      quiet_count = 0;
    }
    if (!quiet[k]) {
      quiet[k] = true;
      ++quiet_count;
    }
    run.log.push_back({update, static_cast<int>(k),
                       potential(run.profile, gains, params), change});
    if (quiet_count == num_players) {
      run.sweeps = (update + num_players - 1) / num_players;
      return run;
    }
  }
  throw SharingConvergenceError(
      "sharing dynamics did not converge within max_sweeps", std::move(run.log));
}

}  // namespace bsg
