#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsg/limits.hpp"
#include "bsg/selection.hpp"
#include "bsg/sharing.hpp"

namespace bsg {

/// Efficiency of the selection game on one channel realization: the social
/// optimum over the full-power strategy set against the worst and best
/// equilibrium welfare.
struct EfficiencyReport {
  double optimum_sum = 0.0;
  double worst_ne_sum = 0.0;
  double best_ne_sum = 0.0;
  double poa = 1.0;  // optimum / worst equilibrium
  double pos = 1.0;  // optimum / best equilibrium
  int ne_count = 0;
};

inline EfficiencyReport efficiency_selection(const ChannelMatrix& gains,
                                             const NetworkParams& params,
                                             const EnumerationLimits& limits = {}) {
  const auto report = enumerate_ne(gains, params, limits);
  if (report.ne_indices.empty()) {
    throw std::logic_error(
        "efficiency_selection: no equilibrium found; the potential maximizer "
        "must be one");
  }

  const auto count = profile_count(params.num_players, params.num_stations);
  double optimum = -std::numeric_limits<double>::infinity();
  detail::for_each_profile(
      gains, params, count,
      [&](const SelectionProfile& profile, std::span<const double> totals) {
        double sum = 0.0;
        for (int k = 0; k < params.num_players; ++k) {
          sum += selection_utility(profile, totals, gains, params, k);
        }
        optimum = std::max(optimum, sum);
      });

  EfficiencyReport efficiency;
  efficiency.optimum_sum = optimum;
  efficiency.ne_count = static_cast<int>(report.ne_indices.size());
  double worst = std::numeric_limits<double>::infinity();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& u : report.utilities) {
    double sum = 0.0;
    for (double v : u) sum += v;
    worst = std::min(worst, sum);
    best = std::max(best, sum);
  }
  efficiency.worst_ne_sum = worst;
  efficiency.best_ne_sum = best;
  efficiency.poa = optimum / worst;
  efficiency.pos = optimum / best;
  return efficiency;
}

/// Per-axis-point aggregates of named metrics over independent trials.
struct SweepResult {
  std::string axis_name;
  std::vector<int> axis;
  std::map<std::string, std::vector<double>> means;
  std::map<std::string, std::vector<double>> std_errors;
  int trials = 0;
  std::uint64_t seed = 0;
};

namespace detail {

class Accumulator {
 public:
  void add(double x) {
    sum_ += x;
    sum_sq_ += x * x;
    ++n_;
  }
  double mean() const { return sum_ / n_; }
  double std_error() const {
    if (n_ < 2) return 0.0;
    const double m = mean();
    const double var = std::max(0.0, (sum_sq_ - n_ * m * m) / (n_ - 1));
    return std::sqrt(var / n_);
  }

 private:
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
  long n_ = 0;
};

}  // namespace detail

/// Mean price of anarchy / stability per player count, over i.i.d. channel
/// draws with uniform bandwidth fractions. The extra metric frac_multiple_ne
/// is the fraction of trials whose PoS fell strictly below the PoA.
inline SweepResult sweep_poa_pos(int num_stations,
                                 const std::vector<int>& player_counts,
                                 int trials, double snr_db, std::uint64_t seed,
                                 const EnumerationLimits& limits = {}) {
  if (trials < 1) {
    throw std::invalid_argument("sweep_poa_pos: trials must be >= 1");
  }
  SweepResult result;
  result.axis_name = "K";
  result.trials = trials;
  result.seed = seed;
  for (int num_players : player_counts) {
    const auto params = params_from_snr(
        num_players, num_stations, uniform_fractions(num_stations), snr_db);
    detail::Accumulator poa, pos, multi;
    const std::uint64_t axis_root = derive_seed(
        seed, {stream::axis, static_cast<std::uint64_t>(num_players)});
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t trial_root = derive_seed(
          axis_root, {stream::trial, static_cast<std::uint64_t>(t)});
      const auto gains = draw_channels(params, {trial_root});
      const auto report = efficiency_selection(gains, params, limits);
      poa.add(report.poa);
      pos.add(report.pos);
      multi.add(report.pos < report.poa ? 1.0 : 0.0);
    }
    result.axis.push_back(num_players);
    result.means["poa"].push_back(poa.mean());
    result.std_errors["poa"].push_back(poa.std_error());
    result.means["pos"].push_back(pos.mean());
    result.std_errors["pos"].push_back(pos.std_error());
    result.means["frac_multiple_ne"].push_back(multi.mean());
    result.std_errors["frac_multiple_ne"].push_back(multi.std_error());
  }
  return result;
}

/// Network spectral efficiency of the two regimes per player count, paired:
/// both arms of a trial consume the same channel draw. The selection arm
/// samples an equilibrium by a random walk from a random start; the sharing
/// arm converges to its unique equilibrium. Uniform bandwidth fractions.
inline SweepResult braess_compare(int num_stations,
                                  const std::vector<int>& player_counts,
                                  int trials, double snr_db,
                                  std::uint64_t seed,
                                  double sharing_epsilon = 1e-9,
                                  std::uint64_t max_sweeps = 10'000) {
  if (trials < 1) {
    throw std::invalid_argument("braess_compare: trials must be >= 1");
  }
  SweepResult result;
  result.axis_name = "K";
  result.trials = trials;
  result.seed = seed;
  for (int num_players : player_counts) {
    const auto params = params_from_snr(
        num_players, num_stations, uniform_fractions(num_stations), snr_db);
    detail::Accumulator selection, sharing;
    const std::uint64_t axis_root = derive_seed(
        seed, {stream::axis, static_cast<std::uint64_t>(num_players)});
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t trial_root = derive_seed(
          axis_root, {stream::trial, static_cast<std::uint64_t>(t)});
      const auto gains = draw_channels(params, {trial_root});

      const auto start = random_selection_profile(
          params, derive_seed(trial_root, {stream::start}));
      const auto selection_run = run_selection_dynamics(
          gains, params, start,
          UpdateSchedule::random(derive_seed(trial_root, {stream::schedule})));
      selection.add(network_se(to_power_profile(selection_run.profile, params),
                               gains, params));

      const auto sharing_run = run_sharing_dynamics(
          gains, params, uniform_profile(params), UpdateSchedule::round_robin(),
          sharing_epsilon, max_sweeps);
      sharing.add(network_se(sharing_run.profile, gains, params));
    }
    result.axis.push_back(num_players);
    result.means["selection"].push_back(selection.mean());
    result.std_errors["selection"].push_back(selection.std_error());
    result.means["sharing"].push_back(sharing.mean());
    result.std_errors["sharing"].push_back(sharing.std_error());
  }
  return result;
}

}  // namespace bsg
