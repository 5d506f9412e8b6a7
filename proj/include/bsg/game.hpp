#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bsg/network.hpp"

namespace bsg {

/// K x S transmit powers; row k is player k's allocation across stations.
/// Feasible rows are nonnegative and sum to at most p_max.
struct PowerProfile {
  Matrix<double> p;
};

using UtilityVector = std::vector<double>;

inline constexpr double kBudgetSlack = 1e-12;

inline void validate(const PowerProfile& profile, const NetworkParams& params) {
  if (profile.p.rows() != static_cast<std::size_t>(params.num_players) ||
      profile.p.cols() != static_cast<std::size_t>(params.num_stations)) {
    throw std::invalid_argument("PowerProfile: dimensions do not match params");
  }
  for (std::size_t k = 0; k < profile.p.rows(); ++k) {
    double row_sum = 0.0;
    for (double v : profile.p.row(k)) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("PowerProfile: powers must be >= 0");
      }
      row_sum += v;
    }
    if (row_sum > params.max_power + kBudgetSlack) {
      throw std::invalid_argument("PowerProfile: row exceeds the power budget");
    }
  }
}

inline PowerProfile zero_profile(const NetworkParams& params) {
  return {Matrix<double>(static_cast<std::size_t>(params.num_players),
                         static_cast<std::size_t>(params.num_stations), 0.0)};
}

/// Every player splits the budget evenly across all stations.
inline PowerProfile uniform_profile(const NetworkParams& params) {
  return {Matrix<double>(static_cast<std::size_t>(params.num_players),
                         static_cast<std::size_t>(params.num_stations),
                         params.max_power / params.num_stations)};
}

/// A feasible row drawn at random: budget scaled by a uniform factor and
/// split by normalized exponentials.
inline std::vector<double> random_power_row(const NetworkParams& params,
                                            SplitMix64& rng) {
  const auto cols = static_cast<std::size_t>(params.num_stations);
  std::vector<double> row(cols);
  double sum = 0.0;
  for (double& v : row) {
    v = rng.exponential();
    sum += v;
  }
  const double scale = params.max_power * rng.uniform01() / sum;
  for (double& v : row) v *= scale;
  return row;
}

inline PowerProfile random_profile(const NetworkParams& params,
                                   std::uint64_t seed) {
  PowerProfile profile = zero_profile(params);
  SplitMix64 rng(seed);
  for (std::size_t k = 0; k < profile.p.rows(); ++k) {
    const auto row = random_power_row(params, rng);
    for (std::size_t s = 0; s < row.size(); ++s) profile.p(k, s) = row[s];
  }
  return profile;
}

/// Noise plus multiple-access interference seen by player k at station s:
/// zeta_{k,s} = sigma_s^2 + sum_{j != k} p_{j,s} g_{j,s}. Always positive.
inline double mai(const PowerProfile& profile, const ChannelMatrix& gains,
                  const NetworkParams& params, int k, int s) {
  double zeta = params.sigma2(s);
  const auto su = static_cast<std::size_t>(s);
  for (std::size_t j = 0; j < profile.p.rows(); ++j) {
    if (j == static_cast<std::size_t>(k)) continue;
    zeta += profile.p(j, su) * gains.gains(j, su);
  }
  return zeta;
}

inline double sinr(const PowerProfile& profile, const ChannelMatrix& gains,
                   const NetworkParams& params, int k, int s) {
  const auto ku = static_cast<std::size_t>(k);
  const auto su = static_cast<std::size_t>(s);
  return profile.p(ku, su) * gains.gains(ku, su) /
         mai(profile, gains, params, k, s);
}

/// Spectral efficiency of player k: u_k = sum_s w_s log2(1 + sinr_{k,s}).
inline double utility(const PowerProfile& profile, const ChannelMatrix& gains,
                      const NetworkParams& params, int k) {
  double u = 0.0;
  for (int s = 0; s < params.num_stations; ++s) {
    u += params.bandwidth_fractions[static_cast<std::size_t>(s)] *
         std::log2(1.0 + sinr(profile, gains, params, k, s));
  }
  return u;
}

inline UtilityVector utilities(const PowerProfile& profile,
                               const ChannelMatrix& gains,
                               const NetworkParams& params) {
  UtilityVector u(static_cast<std::size_t>(params.num_players));
  for (int k = 0; k < params.num_players; ++k) {
    u[static_cast<std::size_t>(k)] = utility(profile, gains, params, k);
  }
  return u;
}

/// Exact potential of both games:
/// phi(p) = sum_s w_s log2(sigma_s^2 + sum_k p_{k,s} g_{k,s}).
inline double potential(const PowerProfile& profile, const ChannelMatrix& gains,
                        const NetworkParams& params) {
  double phi = 0.0;
  for (int s = 0; s < params.num_stations; ++s) {
    const auto su = static_cast<std::size_t>(s);
    double total = params.sigma2(s);
    for (std::size_t k = 0; k < profile.p.rows(); ++k) {
      total += profile.p(k, su) * gains.gains(k, su);
    }
    phi += params.bandwidth_fractions[su] * std::log2(total);
  }
  return phi;
}

/// Residual of the exact-potential identity for a unilateral deviation of
/// player k: |(u_k(p) - u_k(p')) - (phi(p) - phi(p'))|. The profiles must
/// agree on every row other than k.
inline double check_exact_potential(const PowerProfile& profile,
                                    const PowerProfile& deviated,
                                    const ChannelMatrix& gains,
                                    const NetworkParams& params, int k) {
  if (profile.p.rows() != deviated.p.rows() ||
      profile.p.cols() != deviated.p.cols()) {
    throw std::invalid_argument("check_exact_potential: shape mismatch");
  }
  for (std::size_t j = 0; j < profile.p.rows(); ++j) {
    if (j == static_cast<std::size_t>(k)) continue;
    const auto a = profile.p.row(j);
    const auto b = deviated.p.row(j);
    for (std::size_t s = 0; s < a.size(); ++s) {
      if (a[s] != b[s]) {
        throw std::invalid_argument(
            "check_exact_potential: profiles differ outside player k's row");
      }
    }
  }
  const double du = utility(profile, gains, params, k) -
                    utility(deviated, gains, params, k);
  const double dphi =
      potential(profile, gains, params) - potential(deviated, gains, params);
  return std::abs(du - dphi);
}

/// Sum of all players' utilities, the global metric of the experiments.
inline double network_se(const PowerProfile& profile,
                         const ChannelMatrix& gains,
                         const NetworkParams& params) {
  double sum = 0.0;
  for (int k = 0; k < params.num_players; ++k) {
    sum += utility(profile, gains, params, k);
  }
  return sum;
}

}  // namespace bsg
