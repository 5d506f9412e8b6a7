#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bsg/game.hpp"

namespace bsg {

/// Station choice per player (0-based stations). The induced power profile
/// puts the full budget on the chosen station: p_k = p_max * e_{a_k}.
struct SelectionProfile {
  std::vector<int> assignment;
};

/// 1-based mixed-radix index into the S^K profile set; player 0 is the least
/// significant digit: index - 1 = sum_k assignment[k] * S^k. Zero is reserved
/// as a sentinel for "not representable in 64 bits".
using ProfileIndex = std::uint64_t;

class EnumerationCapError : public std::runtime_error {
 public:
  EnumerationCapError(std::uint64_t requested, std::uint64_t cap)
      : std::runtime_error("profile set of size " + std::to_string(requested) +
                           " exceeds the enumeration cap of " +
                           std::to_string(cap)),
        requested_(requested),
        cap_(cap) {}
  std::uint64_t requested() const { return requested_; }
  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t requested_;
  std::uint64_t cap_;
};

/// S^K, or nullopt when it does not fit in 64 bits.
inline std::optional<std::uint64_t> try_profile_count(int num_players,
                                                      int num_stations) {
  std::uint64_t count = 1;
  for (int k = 0; k < num_players; ++k) {
    if (count > std::numeric_limits<std::uint64_t>::max() /
                    static_cast<std::uint64_t>(num_stations)) {
      return std::nullopt;
    }
    count *= static_cast<std::uint64_t>(num_stations);
  }
  return count;
}

inline std::uint64_t profile_count(int num_players, int num_stations) {
  const auto count = try_profile_count(num_players, num_stations);
  if (!count) {
    throw std::overflow_error("profile count S^K overflows 64 bits");
  }
  return *count;
}

/// Maximum number of equilibria the selection game can exhibit: S^(K-1).
inline std::uint64_t max_ne_bound(int num_players, int num_stations) {
  if (num_players < 1 || num_stations < 1) {
    throw std::invalid_argument("max_ne_bound: K and S must be >= 1");
  }
  return profile_count(num_players - 1, num_stations);
}

inline ProfileIndex profile_index(const SelectionProfile& profile,
                                  int num_stations) {
  if (!try_profile_count(static_cast<int>(profile.assignment.size()),
                         num_stations)) {
    throw std::overflow_error("profile index overflows 64 bits");
  }
  std::uint64_t index = 0;
  std::uint64_t radix = 1;
  for (std::size_t k = 0; k < profile.assignment.size(); ++k) {
    index += static_cast<std::uint64_t>(profile.assignment[k]) * radix;
    if (k + 1 < profile.assignment.size()) {
      radix *= static_cast<std::uint64_t>(num_stations);
    }
  }
  return index + 1;
}

/// profile_index when S^K fits in 64 bits, the 0 sentinel otherwise.
inline ProfileIndex profile_index_or_zero(const SelectionProfile& profile,
                                          int num_stations) {
  if (!try_profile_count(static_cast<int>(profile.assignment.size()),
                         num_stations)) {
    return 0;
  }
  return profile_index(profile, num_stations);
}

inline SelectionProfile profile_from_index(ProfileIndex index, int num_players,
                                           int num_stations) {
  if (index < 1 || index > profile_count(num_players, num_stations)) {
    throw std::out_of_range("profile index out of range");
  }
  SelectionProfile profile;
  profile.assignment.resize(static_cast<std::size_t>(num_players));
  std::uint64_t rest = index - 1;
  for (int k = 0; k < num_players; ++k) {
    profile.assignment[static_cast<std::size_t>(k)] =
        static_cast<int>(rest % static_cast<std::uint64_t>(num_stations));
    rest /= static_cast<std::uint64_t>(num_stations);
  }
  return profile;
}

/// Number of players whose choice differs: the shortest-path distance in the
/// one-deviation profile graph.
inline int graph_distance(const SelectionProfile& a,
                          const SelectionProfile& b) {
  if (a.assignment.size() != b.assignment.size()) {
    throw std::invalid_argument("graph_distance: profile sizes differ");
  }
  int d = 0;
  for (std::size_t k = 0; k < a.assignment.size(); ++k) {
    d += a.assignment[k] != b.assignment[k];
  }
  return d;
}

inline int graph_distance(ProfileIndex i, ProfileIndex j, int num_players,
                          int num_stations) {
  return graph_distance(profile_from_index(i, num_players, num_stations),
                        profile_from_index(j, num_players, num_stations));
}

inline PowerProfile to_power_profile(const SelectionProfile& profile,
                                     const NetworkParams& params) {
  PowerProfile power = zero_profile(params);
  for (std::size_t k = 0; k < profile.assignment.size(); ++k) {
    power.p(k, static_cast<std::size_t>(profile.assignment[k])) =
        params.max_power;
  }
  return power;
}

inline SelectionProfile random_selection_profile(const NetworkParams& params,
                                                 std::uint64_t seed) {
  SplitMix64 rng(seed);
  SelectionProfile profile;
  profile.assignment.resize(static_cast<std::size_t>(params.num_players));
  for (int& a : profile.assignment) {
    a = static_cast<int>(
        rng.below(static_cast<std::uint64_t>(params.num_stations)));
  }
  return profile;
}

// --- closed-form evaluation on the full-power strategy set ---------------
//
// For a selection profile the per-station aggregate
//   total_s = sigma_s^2 + p_max * sum_{k : a_k = s} g_{k,s}
// determines everything:
//   phi      = sum_s w_s log2(total_s)
//   u_k      = w_a log2(total_a) - w_a log2(total_a - p_max g_{k,a}),  a = a_k
//   deviation of k to s != a_k is worth w_s log2(1 + p_max g_{k,s} / total_s).

inline void station_totals_into(const SelectionProfile& profile,
                                const ChannelMatrix& gains,
                                const NetworkParams& params,
                                std::vector<double>& totals) {
  totals.resize(static_cast<std::size_t>(params.num_stations));
  for (int s = 0; s < params.num_stations; ++s) {
    totals[static_cast<std::size_t>(s)] = params.sigma2(s);
  }
  for (std::size_t k = 0; k < profile.assignment.size(); ++k) {
    const auto s = static_cast<std::size_t>(profile.assignment[k]);
    totals[s] += params.max_power * gains.gains(k, s);
  }
}

inline std::vector<double> station_totals(const SelectionProfile& profile,
                                          const ChannelMatrix& gains,
                                          const NetworkParams& params) {
  std::vector<double> totals;
  station_totals_into(profile, gains, params, totals);
  return totals;
}

inline double selection_potential(std::span<const double> totals,
                                  const NetworkParams& params) {
  double phi = 0.0;
  for (std::size_t s = 0; s < totals.size(); ++s) {
    phi += params.bandwidth_fractions[s] * std::log2(totals[s]);
  }
  return phi;
}

/// Value of player k switching to station s, all opponents fixed. For the
/// current station this is the player's utility in the profile itself.
inline double deviation_value(const SelectionProfile& profile,
                              std::span<const double> totals,
                              const ChannelMatrix& gains,
                              const NetworkParams& params, int k, int s) {
  const auto ku = static_cast<std::size_t>(k);
  const auto su = static_cast<std::size_t>(s);
  const double own = params.max_power * gains.gains(ku, su);
  const double interference =
      profile.assignment[ku] == s ? totals[su] - own : totals[su];
  return params.bandwidth_fractions[su] * std::log2(1.0 + own / interference);
}

inline double selection_utility(const SelectionProfile& profile,
                                std::span<const double> totals,
                                const ChannelMatrix& gains,
                                const NetworkParams& params, int k) {
  return deviation_value(profile, totals, gains, params, k,
                         profile.assignment[static_cast<std::size_t>(k)]);
}

/// Best station for player k against fixed opponents. Stays on the current
/// station on exact ties; otherwise the lowest-index maximizer wins.
inline int best_station(const SelectionProfile& profile,
                        std::span<const double> totals,
                        const ChannelMatrix& gains, const NetworkParams& params,
                        int k) {
  const int current = profile.assignment[static_cast<std::size_t>(k)];
  int best = -1;
  double best_value = -1.0;
  for (int s = 0; s < params.num_stations; ++s) {
    const double value = deviation_value(profile, totals, gains, params, k, s);
    if (value > best_value) {
      best = s;
      best_value = value;
    }
  }
  if (deviation_value(profile, totals, gains, params, k, current) ==
      best_value) {
    return current;
  }
  return best;
}

/// One best-response step of player k (whole-profile form).
inline SelectionProfile best_response_selection(const ChannelMatrix& gains,
                                                const NetworkParams& params,
                                                const SelectionProfile& profile,
                                                int k) {
  const auto totals = station_totals(profile, gains, params);
  SelectionProfile next = profile;
  next.assignment[static_cast<std::size_t>(k)] =
      best_station(profile, totals, gains, params, k);
  return next;
}

/// True when no player has a strictly improving unilateral deviation.
inline bool is_selection_ne(const SelectionProfile& profile,
                            const ChannelMatrix& gains,
                            const NetworkParams& params) {
  const auto totals = station_totals(profile, gains, params);
  for (int k = 0; k < params.num_players; ++k) {
    const double current =
        deviation_value(profile, totals, gains, params, k,
                        profile.assignment[static_cast<std::size_t>(k)]);
    for (int s = 0; s < params.num_stations; ++s) {
      if (deviation_value(profile, totals, gains, params, k, s) > current) {
        return false;
      }
    }
  }
  return true;
}

// --- exhaustive equilibrium enumeration -----------------------------------

struct EnumerationLimits {
  std::uint64_t max_profiles = 10'000'000;
};

/// Equilibria of the selection game, sorted by potential descending.
/// is_unique_potential reports whether all S^K potential values are pairwise
/// distinct at 1e-12 resolution (the genericity condition behind the
/// S^(K-1) bound).
struct NeReport {
  std::vector<ProfileIndex> ne_indices;
  std::vector<double> potentials;
  std::vector<UtilityVector> utilities;
  bool is_unique_potential = true;
};

namespace detail {

/// Calls visit(profile, totals) for every one of the S^K profiles in index
/// order (index 1 first; player 0 is the least significant digit).
template <typename Visitor>
void for_each_profile(const ChannelMatrix& gains, const NetworkParams& params,
                      std::uint64_t count, Visitor&& visit) {
  SelectionProfile profile;
  profile.assignment.assign(static_cast<std::size_t>(params.num_players), 0);
  std::vector<double> totals;
  for (std::uint64_t i = 0;; ++i) {
    station_totals_into(profile, gains, params, totals);
    visit(const_cast<const SelectionProfile&>(profile),
          std::span<const double>(totals));
    if (i + 1 == count) break;
    for (std::size_t k = 0;; ++k) {
      if (profile.assignment[k] + 1 < params.num_stations) {
        ++profile.assignment[k];
        break;
      }
      profile.assignment[k] = 0;
    }
  }
}

inline bool all_distinct_at_resolution(std::vector<double> values,
                                       double resolution) {
  std::sort(values.begin(), values.end());
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] - values[i - 1] < resolution) return false;
  }
  return true;
}

}  // namespace detail

inline NeReport enumerate_ne(const ChannelMatrix& gains,
                             const NetworkParams& params,
                             const EnumerationLimits& limits = {}) {
  const auto count = try_profile_count(params.num_players, params.num_stations);
  if (!count || *count > limits.max_profiles) {
    throw EnumerationCapError(
        count.value_or(std::numeric_limits<std::uint64_t>::max()),
        limits.max_profiles);
  }

  NeReport report;
  std::vector<double> all_potentials;
  all_potentials.reserve(static_cast<std::size_t>(*count));
  std::uint64_t index = 1;
  detail::for_each_profile(
      gains, params, *count,
      [&](const SelectionProfile& profile, std::span<const double> totals) {
        all_potentials.push_back(selection_potential(totals, params));
        bool ne = true;
        UtilityVector u(static_cast<std::size_t>(params.num_players));
        for (int k = 0; k < params.num_players && ne; ++k) {
          const double current = deviation_value(
              profile, totals, gains, params, k,
              profile.assignment[static_cast<std::size_t>(k)]);
          u[static_cast<std::size_t>(k)] = current;
          for (int s = 0; s < params.num_stations; ++s) {
            if (deviation_value(profile, totals, gains, params, k, s) >
                current) {
              ne = false;
              break;
            }
          }
        }
        if (ne) {
          report.ne_indices.push_back(index);
          report.potentials.push_back(all_potentials.back());
          report.utilities.push_back(std::move(u));
        }
        ++index;
      });

  report.is_unique_potential =
      detail::all_distinct_at_resolution(std::move(all_potentials), 1e-12);

  // sort the report by potential descending
  std::vector<std::size_t> order(report.ne_indices.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (report.potentials[a] != report.potentials[b]) {
      return report.potentials[a] > report.potentials[b];
    }
    return report.ne_indices[a] < report.ne_indices[b];
  });
  NeReport sorted;
  sorted.is_unique_potential = report.is_unique_potential;
  for (std::size_t i : order) {
    sorted.ne_indices.push_back(report.ne_indices[i]);
    sorted.potentials.push_back(report.potentials[i]);
    sorted.utilities.push_back(std::move(report.utilities[i]));
  }
  return sorted;
}

/// Potential of every profile by index, for landscape exports.
inline std::vector<double> potential_landscape(
    const ChannelMatrix& gains, const NetworkParams& params,
    const EnumerationLimits& limits = {}) {
  const auto count = try_profile_count(params.num_players, params.num_stations);
  if (!count || *count > limits.max_profiles) {
    throw EnumerationCapError(
        count.value_or(std::numeric_limits<std::uint64_t>::max()),
        limits.max_profiles);
  }
  std::vector<double> landscape;
  landscape.reserve(static_cast<std::size_t>(*count));
  detail::for_each_profile(
      gains, params, *count,
      [&](const SelectionProfile&, std::span<const double> totals) {
        landscape.push_back(selection_potential(totals, params));
      });
  return landscape;
}

// --- strategy-profile graphs ----------------------------------------------

struct AdjacencyLimits {
  std::uint64_t max_profiles = 4096;
};

/// Adjacency matrices of the profile graphs: `neighbors` links profiles that
/// differ in exactly one player's choice; `improving` orients each such edge
/// toward strictly larger potential. Equal-potential neighbors stay
/// unconnected in `improving`.
struct ProfileGraphs {
  Matrix<std::uint8_t> neighbors;  // symmetric, zero diagonal
  Matrix<std::uint8_t> improving;  // improving(i,j) = 1 iff phi(j) > phi(i)
};

inline ProfileGraphs adjacency_matrices(const ChannelMatrix& gains,
                                        const NetworkParams& params,
                                        const AdjacencyLimits& limits = {}) {
  const auto count = try_profile_count(params.num_players, params.num_stations);
  if (!count || *count > limits.max_profiles) {
    throw EnumerationCapError(
        count.value_or(std::numeric_limits<std::uint64_t>::max()),
        limits.max_profiles);
  }
  const auto n = static_cast<std::size_t>(*count);
  EnumerationLimits enum_limits{limits.max_profiles};
  const auto landscape = potential_landscape(gains, params, enum_limits);

  ProfileGraphs graphs{Matrix<std::uint8_t>(n, n, 0),
                       Matrix<std::uint8_t>(n, n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = profile_from_index(i + 1, params.num_players,
                                      params.num_stations);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto b = profile_from_index(j + 1, params.num_players,
                                        params.num_stations);
      if (graph_distance(a, b) != 1) continue;
      graphs.neighbors(i, j) = graphs.neighbors(j, i) = 1;
      if (landscape[j] > landscape[i]) graphs.improving(i, j) = 1;
      if (landscape[i] > landscape[j]) graphs.improving(j, i) = 1;
    }
  }
  return graphs;
}

// --- decentralized best-response dynamics ----------------------------------

enum class ScheduleKind { round_robin, random };

/// Player-update order of a dynamics run. random draws the next player
/// uniformly from the given seed; round_robin cycles 0..K-1.
struct UpdateSchedule {
  ScheduleKind kind = ScheduleKind::round_robin;
  std::uint64_t seed = 0;

  static UpdateSchedule round_robin() { return {ScheduleKind::round_robin, 0}; }
  static UpdateSchedule random(std::uint64_t seed) {
    return {ScheduleKind::random, seed};
  }
};

/// One logged update attempt. Step 0 records the starting profile with
/// player = -1. `index` is 0 when S^K does not fit in 64 bits.
struct SelectionStep {
  std::uint64_t step = 0;
  int player = -1;
  ProfileIndex index = 0;
  double potential = 0.0;
  bool changed = false;
};

struct SelectionRun {
  SelectionProfile profile;
  std::vector<SelectionStep> log;
  std::uint64_t change_steps = 0;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(std::string message, std::vector<SelectionStep> log)
      : std::runtime_error(std::move(message)), log_(std::move(log)) {}
  explicit ConvergenceError(std::string message)
      : std::runtime_error(std::move(message)) {}
  const std::vector<SelectionStep>& log() const { return log_; }

 private:
  std::vector<SelectionStep> log_;
};

/// Runs single-player best-response updates until a full pass over all K
/// players produces no change (for random schedules: every player verified
/// since the last change). The terminal profile is an equilibrium; the
/// potential strictly increases at every changing step.
inline SelectionRun run_selection_dynamics(const ChannelMatrix& gains,
                                           const NetworkParams& params,
                                           const SelectionProfile& start,
                                           const UpdateSchedule& schedule,
                                           std::uint64_t max_steps = 1'000'000) {
  if (max_steps < 1) {
    throw std::invalid_argument("run_selection_dynamics: max_steps must be >= 1");
  }
  const auto num_players = static_cast<std::size_t>(params.num_players);
  if (start.assignment.size() != num_players) {
    throw std::invalid_argument("run_selection_dynamics: start profile size");
  }

  SelectionRun run;
  run.profile = start;
  SplitMix64 picker(schedule.seed);

  auto totals = station_totals(run.profile, gains, params);
  run.log.push_back({0, -1,
                     profile_index_or_zero(run.profile, params.num_stations),
                     selection_potential(totals, params), false});

  std::vector<bool> verified(num_players, false);
  std::size_t verified_count = 0;
  std::size_t next_round_robin = 0;

  for (std::uint64_t step = 1; step <= max_steps; ++step) {
    std::size_t k;
    if (schedule.kind == ScheduleKind::round_robin) {
      k = next_round_robin;
      next_round_robin = (next_round_robin + 1) % num_players;
    } else {
      k = static_cast<std::size_t>(picker.below(num_players));
    }

    const int chosen =
        best_station(run.profile, totals, gains, params, static_cast<int>(k));
    const bool changed = chosen != run.profile.assignment[k];
    if (changed) {
      run.profile.assignment[k] = chosen;
      totals = station_totals(run.profile, gains, params);
      ++run.change_steps;
      std::fill(verified.begin(), verified.end(), false);
      verified_count = 0;
    }
    if (!verified[k]) {
      verified[k] = true;
      ++verified_count;
    }
    run.log.push_back({step, static_cast<int>(k),
                       profile_index_or_zero(run.profile, params.num_stations),
                       selection_potential(totals, params), changed});
    if (verified_count == num_players) {
      return run;
    }
  }
  throw ConvergenceError(
      "selection dynamics did not converge within max_steps; this violates "
      "the finite improvement property",
      std::move(run.log));
}

}  // namespace bsg
