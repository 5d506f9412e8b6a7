#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsg/matrix.hpp"
#include "bsg/rng.hpp"

namespace bsg {

/// Scalar constants of the network: K transmitters, S base stations, the
/// bandwidth split w_s = B_s / B, noise density N0 and the per-player power
/// budget p_max. The noise power at station s is sigma2(s) = N0 * B * w_s.
///
/// Build instances through make_params() or params_from_snr(); both validate
/// and keep snr_db consistent with the physical scalars.
struct NetworkParams {
  int num_players = 0;                      // K
  int num_stations = 0;                     // S
  std::vector<double> bandwidth_fractions;  // w, strictly positive, sums to 1
  double total_bandwidth = 1.0;             // B
  double noise_density = 1.0;               // N0
  double max_power = 1.0;                   // p_max
  double snr_db = 0.0;                      // 10 log10(p_max / (N0 B))

  double sigma2(int s) const {
    return noise_density * total_bandwidth *
           bandwidth_fractions[static_cast<std::size_t>(s)];
  }
};

inline void validate(const NetworkParams& params) {
  if (params.num_players < 1) {
    throw std::invalid_argument("NetworkParams: need at least one player");
  }
  if (params.num_stations < 1) {
    throw std::invalid_argument("NetworkParams: need at least one station");
  }
  const auto& w = params.bandwidth_fractions;
  if (w.size() != static_cast<std::size_t>(params.num_stations)) {
    throw std::invalid_argument(
        "NetworkParams: bandwidth_fractions size must equal num_stations");
  }
  double sum = 0.0;
  for (double ws : w) {
    if (!(ws > 0.0) || !std::isfinite(ws)) {
      throw std::invalid_argument(
          "NetworkParams: bandwidth fractions must be positive");
    }
    sum += ws;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument(
        "NetworkParams: bandwidth fractions must sum to 1 (got " +
        std::to_string(sum) + ")");
  }
  if (!(params.total_bandwidth > 0.0) || !(params.noise_density > 0.0) ||
      !(params.max_power > 0.0)) {
    throw std::invalid_argument(
        "NetworkParams: B, N0 and p_max must be positive");
  }
  if (!std::isfinite(params.snr_db)) {
    throw std::invalid_argument("NetworkParams: snr_db must be finite");
  }
}

/// Builds params from explicit physical scalars; snr_db is derived from them.
inline NetworkParams make_params(int num_players, int num_stations,
                                 std::vector<double> fractions,
                                 double total_bandwidth, double noise_density,
                                 double max_power) {
  NetworkParams params;
  params.num_players = num_players;
  params.num_stations = num_stations;
  params.bandwidth_fractions = std::move(fractions);
  params.total_bandwidth = total_bandwidth;
  params.noise_density = noise_density;
  params.max_power = max_power;
  params.snr_db =
      10.0 * std::log10(max_power / (noise_density * total_bandwidth));
  validate(params);
  return params;
}

/// Normalized construction used throughout: B = 1, N0 = 1, and the SNR fixes
/// p_max = 10^(snr_db / 10). With it, sigma2(s) reduces to w_s.
inline NetworkParams params_from_snr(int num_players, int num_stations,
                                     std::vector<double> fractions,
                                     double snr_db) {
  if (!std::isfinite(snr_db)) {
    throw std::invalid_argument("params_from_snr: snr_db must be finite");
  }
  return make_params(num_players, num_stations, std::move(fractions), 1.0, 1.0,
                     std::pow(10.0, snr_db / 10.0));
}

inline std::vector<double> uniform_fractions(int num_stations) {
  return std::vector<double>(static_cast<std::size_t>(num_stations),
                             1.0 / num_stations);
}

/// K x S channel gains g_{k,s} = |h_{k,s}|^2. The complex coefficients are
/// kept only when the draw went through them.
struct ChannelMatrix {
  Matrix<double> gains;
  std::optional<Matrix<std::complex<double>>> coeffs;
};

/// Draws i.i.d. unit-mean exponential gains (the modulus-squared of a
/// unit-variance circularly symmetric complex Gaussian). One stream per
/// player: derive_seed(seed, {stream::channels, k}).
inline ChannelMatrix draw_channels(const NetworkParams& params, RngSeed seed) {
  const auto rows = static_cast<std::size_t>(params.num_players);
  const auto cols = static_cast<std::size_t>(params.num_stations);
  ChannelMatrix channels{Matrix<double>(rows, cols), std::nullopt};
  for (std::size_t k = 0; k < rows; ++k) {
    SplitMix64 rng(derive_seed(seed.value, {stream::channels, k}));
    for (std::size_t s = 0; s < cols; ++s) {
      channels.gains(k, s) = rng.exponential();
    }
  }
  return channels;
}

/// Same distribution through the complex route: h ~ CN(0, 1), g = |h|^2.
inline ChannelMatrix draw_channels_complex(const NetworkParams& params,
                                           RngSeed seed) {
  const auto rows = static_cast<std::size_t>(params.num_players);
  const auto cols = static_cast<std::size_t>(params.num_stations);
  ChannelMatrix channels{Matrix<double>(rows, cols),
                         Matrix<std::complex<double>>(rows, cols)};
  for (std::size_t k = 0; k < rows; ++k) {
    SplitMix64 rng(derive_seed(seed.value, {stream::channels, k}));
    for (std::size_t s = 0; s < cols; ++s) {
      const std::complex<double> h(rng.normal() / std::sqrt(2.0),
                                   rng.normal() / std::sqrt(2.0));
      (*channels.coeffs)(k, s) = h;
      channels.gains(k, s) = std::norm(h);
    }
  }
  return channels;
}

}  // namespace bsg
