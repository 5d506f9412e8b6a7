#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "bsg/bsg.hpp"
#include "oracles.hpp"

using namespace bsg;

TEST_CASE("equilibrium fractions equal the bandwidth split") {
  const std::vector<double> w{0.25, 0.11, 0.20, 0.05, 0.25, 0.14};
  const auto params = params_from_snr(100, 6, w, 10.0);
  const auto eq = nonatomic_equilibrium_fractions(params);
  CHECK(eq.fractions.x == w);
  CHECK(eq.optimum_value ==
        Catch::Approx(nonatomic_potential(eq.fractions, params)).epsilon(1e-15));

  const auto uniform = params_from_snr(50, 4, uniform_fractions(4), 10.0);
  for (double x : nonatomic_equilibrium_fractions(uniform).fractions.x) {
    CHECK(x == Catch::Approx(0.25).epsilon(1e-12));
  }

  const auto single = params_from_snr(10, 1, {1.0}, 10.0);
  CHECK(nonatomic_equilibrium_fractions(single).fractions.x ==
        std::vector<double>{1.0});
}

TEST_CASE("single-station rescaled potential closed form") {
  const auto params = params_from_snr(10, 1, {1.0}, 10.0);
  const double alpha = params.total_bandwidth / params.num_players;
  CHECK(nonatomic_potential({{1.0}}, params) ==
        Catch::Approx(std::log2(params.noise_density * alpha +
                                params.max_power))
            .epsilon(1e-15));
}

TEST_CASE("the bandwidth split maximizes the rescaled potential") {
  SECTION("dense simplex grid, S = 2") {
    const auto params = params_from_snr(40, 2, {0.3, 0.7}, 10.0);
    const double at_w =
        nonatomic_potential({params.bandwidth_fractions}, params);
    double grid_best = -1e300;
    oracle::for_each_simplex_point(2, 1000, [&](std::vector<double> x) {
      const double value = nonatomic_potential({std::move(x)}, params);
      CHECK(value <= at_w + 1e-12);
      grid_best = std::max(grid_best, value);
    });
    CHECK(grid_best >= at_w - 1e-3);
  }

  SECTION("dense simplex grid, S = 3") {
    const auto params = params_from_snr(60, 3, {0.14, 0.40, 0.46}, 10.0);
    const double at_w =
        nonatomic_potential({params.bandwidth_fractions}, params);
    double grid_best = -1e300;
    oracle::for_each_simplex_point(3, 1000, [&](std::vector<double> x) {
      const double value = nonatomic_potential({std::move(x)}, params);
      CHECK(value <= at_w + 1e-12);
      grid_best = std::max(grid_best, value);
    });
    CHECK(grid_best >= at_w - 1e-3);
  }
}

TEST_CASE("the rescaled potential is midpoint concave") {
  const auto params = params_from_snr(30, 3, {0.2, 0.3, 0.5}, 10.0);
  SplitMix64 rng(131);
  for (int rep = 0; rep < 100; ++rep) {
    auto draw_point = [&] {
      std::vector<double> x(3);
      double sum = 0.0;
      for (auto& v : x) {
        v = rng.exponential();
        sum += v;
      }
      for (auto& v : x) v /= sum;
      return x;
    };
    const auto a = draw_point();
    const auto b = draw_point();
    std::vector<double> mid(3);
    for (std::size_t s = 0; s < 3; ++s) mid[s] = 0.5 * (a[s] + b[s]);
    CHECK(nonatomic_potential({mid}, params) >=
          0.5 * (nonatomic_potential({a}, params) +
                 nonatomic_potential({b}, params)) -
              1e-12);
  }
}

TEST_CASE("gradient components are equal at the equilibrium fractions") {
  const auto params = params_from_snr(25, 3, {0.14, 0.40, 0.46}, 10.0);
  const double gain_mean = 1.0;
  std::vector<double> gradient(3);
  for (int s = 0; s < 3; ++s) {
    const auto su = static_cast<std::size_t>(s);
    const double w = params.bandwidth_fractions[su];
    const double alpha_s =
        w * params.total_bandwidth / params.num_players;
    gradient[su] = w * params.max_power * gain_mean /
                   ((params.noise_density * alpha_s +
                     w * params.max_power * gain_mean) *
                    std::numbers::ln2);
  }
  CHECK(std::abs(gradient[0] - gradient[1]) <= 1e-9);
  CHECK(std::abs(gradient[1] - gradient[2]) <= 1e-9);
}

TEST_CASE("empirical fractions partition the players") {
  SECTION("one player lands on exactly one station") {
    const auto params = params_from_snr(1, 3, {0.2, 0.3, 0.5}, 10.0);
    const auto result = empirical_fractions(params, {7}, 1);
    int ones = 0;
    double sum = 0.0;
    for (double x : result.mean.x) {
      if (x == 1.0) ++ones;
      sum += x;
    }
    CHECK(ones == 1);
    CHECK(sum == Catch::Approx(1.0).epsilon(1e-12));
  }

  SECTION("fractions average to a simplex point") {
    const auto params = params_from_snr(12, 3, {0.14, 0.40, 0.46}, 10.0);
    const auto result = empirical_fractions(params, {8}, 25);
    double sum = 0.0;
    for (double x : result.mean.x) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(sum == Catch::Approx(1.0).epsilon(1e-12));
  }

  SECTION("occupancy tracks the bandwidth split at moderate scale") {
    const std::vector<double> w{0.25, 0.11, 0.20, 0.05, 0.25, 0.14};
    const auto params = params_from_snr(100, 6, w, 10.0);
    const auto result = empirical_fractions(params, {9}, 30);
    for (std::size_t s = 0; s < 6; ++s) {
      CHECK(result.mean.x[s] == Catch::Approx(w[s]).margin(0.05));
    }
  }
}

TEST_CASE("degenerate mixed profiles reproduce the pure game") {
  const auto params = params_from_snr(4, 3, {0.14, 0.40, 0.46}, 10.0);
  const auto gains = draw_channels(params, {137});
  SplitMix64 rng(138);
  for (int rep = 0; rep < 10; ++rep) {
    const auto sel = random_selection_profile(params, rng.next());
    const auto mixed = degenerate_mixed(sel, params);
    const auto power = to_power_profile(sel, params);
    CHECK(mixed_potential(mixed, gains, params) ==
          Catch::Approx(potential(power, gains, params)).margin(1e-12));
    for (int k = 0; k < 4; ++k) {
      CHECK(mixed_utility(mixed, gains, params, k) ==
            Catch::Approx(utility(power, gains, params, k)).margin(1e-12));
    }
  }
}

TEST_CASE("uniform mixing averages the pure utilities") {
  const auto params = params_from_snr(2, 2, {0.5, 0.5}, 10.0);
  const auto gains = draw_channels(params, {139});
  const MixedProfile uniform{Matrix<double>(2, 2, 0.5)};
  for (int k = 0; k < 2; ++k) {
    double mean = 0.0;
    for (ProfileIndex i = 1; i <= 4; ++i) {
      const auto profile = profile_from_index(i, 2, 2);
      mean += utility(to_power_profile(profile, params), gains, params, k);
    }
    mean /= 4.0;
    CHECK(mixed_utility(uniform, gains, params, k) ==
          Catch::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("exact mixed utility matches Monte-Carlo sampling") {
  const auto params = params_from_snr(3, 2, {0.4, 0.6}, 10.0);
  const auto gains = draw_channels(params, {149});
  MixedProfile mixed{Matrix<double>(3, 2)};
  SplitMix64 rng(150);
  for (std::size_t k = 0; k < 3; ++k) {
    const double q = 0.1 + 0.8 * rng.uniform01();
    mixed.q(k, 0) = q;
    mixed.q(k, 1) = 1.0 - q;
  }
  const double exact = mixed_utility(mixed, gains, params, 0);

  const int samples = 100'000;
  double sum = 0.0;
  double sum_sq = 0.0;
  SelectionProfile draw{{0, 0, 0}};
  for (int i = 0; i < samples; ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      draw.assignment[k] = rng.uniform01() < mixed.q(k, 0) ? 0 : 1;
    }
    const double u = oracle::selection_utility_ref(draw, gains, params, 0);
    sum += u;
    sum_sq += u * u;
  }
  const double mc_mean = sum / samples;
  const double mc_var = (sum_sq - samples * mc_mean * mc_mean) / (samples - 1);
  const double mc_se = std::sqrt(mc_var / samples);
  CHECK(std::abs(exact - mc_mean) <= 3.0 * mc_se);
}

TEST_CASE("mixed extension keeps the exact-potential identity") {
  const auto params = params_from_snr(2, 2, {0.5, 0.5}, 10.0);
  SplitMix64 rng(151);
  for (int rep = 0; rep < 100; ++rep) {
    const auto gains = draw_channels(params, {rng.next()});
    MixedProfile mixed{Matrix<double>(2, 2)};
    for (std::size_t k = 0; k < 2; ++k) {
      const double q = rng.uniform01();
      mixed.q(k, 0) = q;
      mixed.q(k, 1) = 1.0 - q;
    }
    const int k = static_cast<int>(rng.below(2));
    MixedProfile deviated = mixed;
    const double q = rng.uniform01();
    deviated.q(static_cast<std::size_t>(k), 0) = q;
    deviated.q(static_cast<std::size_t>(k), 1) = 1.0 - q;

    const double du = mixed_utility(mixed, gains, params, k) -
                      mixed_utility(deviated, gains, params, k);
    const double dphi = mixed_potential(mixed, gains, params) -
                        mixed_potential(deviated, gains, params);
    CHECK(std::abs(du - dphi) <= 1e-9);
  }
}

TEST_CASE("the mixed potential is affine in each player's row") {
  const auto params = params_from_snr(3, 3, {0.2, 0.3, 0.5}, 10.0);
  const auto gains = draw_channels(params, {157});
  SplitMix64 rng(158);
  auto random_row = [&] {
    std::vector<double> row(3);
    double sum = 0.0;
    for (auto& v : row) {
      v = rng.exponential();
      sum += v;
    }
    for (auto& v : row) v /= sum;
    return row;
  };
  for (int rep = 0; rep < 20; ++rep) {
    MixedProfile base{Matrix<double>(3, 3)};
    for (std::size_t k = 0; k < 3; ++k) {
      const auto row = random_row();
      for (std::size_t s = 0; s < 3; ++s) base.q(k, s) = row[s];
    }
    const std::size_t k = rng.below(3);
    const auto row_a = random_row();
    const auto row_b = random_row();

    auto with_row = [&](const std::vector<double>& row) {
      MixedProfile q = base;
      for (std::size_t s = 0; s < 3; ++s) q.q(k, s) = row[s];
      return mixed_potential(q, gains, params);
    };
    std::vector<double> mid(3);
    for (std::size_t s = 0; s < 3; ++s) mid[s] = 0.5 * (row_a[s] + row_b[s]);
    CHECK(with_row(mid) ==
          Catch::Approx(0.5 * (with_row(row_a) + with_row(row_b)))
              .margin(1e-10));
  }
}

TEST_CASE("the mixed potential never exceeds the best pure potential") {
  // the expected potential is a convex combination of pure potentials, so
  // maximizing it over product distributions lands on a pure profile
  const auto params = params_from_snr(3, 2, {0.4, 0.6}, 10.0);
  const auto gains = draw_channels(params, {401});
  const auto landscape = potential_landscape(gains, params);
  const double best_pure = *std::max_element(landscape.begin(), landscape.end());

  SplitMix64 rng(402);
  for (int rep = 0; rep < 50; ++rep) {
    MixedProfile mixed{Matrix<double>(3, 2)};
    for (std::size_t k = 0; k < 3; ++k) {
      const double q = rng.uniform01();
      mixed.q(k, 0) = q;
      mixed.q(k, 1) = 1.0 - q;
    }
    CHECK(mixed_potential(mixed, gains, params) <= best_pure + 1e-12);
  }
  // and the bound is attained by the degenerate embedding of the maximizer
  const auto argmax = static_cast<ProfileIndex>(
      std::max_element(landscape.begin(), landscape.end()) -
      landscape.begin() + 1);
  const auto at_max = degenerate_mixed(
      profile_from_index(argmax, 3, 2), params);
  CHECK(mixed_potential(at_max, gains, params) ==
        Catch::Approx(best_pure).margin(1e-12));
}

TEST_CASE("pure equilibria remain equilibria in the mixed embedding") {
  const auto params = params_from_snr(3, 2, {0.4, 0.6}, 10.0);
  const auto gains = draw_channels(params, {163});
  const auto report = enumerate_ne(gains, params);
  REQUIRE(!report.ne_indices.empty());
  for (ProfileIndex index : report.ne_indices) {
    const auto mixed =
        degenerate_mixed(profile_from_index(index, 3, 2), params);
    for (int k = 0; k < 3; ++k) {
      const double current = mixed_utility(mixed, gains, params, k);
      for (int s = 0; s < 2; ++s) {
        MixedProfile deviated = mixed;
        for (std::size_t r = 0; r < 2; ++r) {
          deviated.q(static_cast<std::size_t>(k), r) = r == static_cast<std::size_t>(s) ? 1.0 : 0.0;
        }
        CHECK(mixed_utility(deviated, gains, params, k) <= current + 1e-12);
      }
    }
  }
}

TEST_CASE("fully mixed equilibria are ruled out by a dominant station") {
  SECTION("constructed boundary case") {
    // g ratios and noise chosen so the inequality holds with equality
    const auto params = make_params(2, 2, {0.5, 0.5}, 1.0, 2.0, 9.0);
    ChannelMatrix gains{Matrix<double>(2, 2), std::nullopt};
    gains.gains(0, 0) = 1.0;   // player 0, station 0
    gains.gains(0, 1) = 0.1;   // the weak alternative
    gains.gains(1, 0) = 1.0;   // interferer at station 0: p_max * g = 9
    gains.gains(1, 1) = 1.0;
    CHECK(no_fully_mixed_ne_2x2(gains, params));
  }

  SECTION("symmetric low-power instances admit interior candidates") {
    const auto params = params_from_snr(2, 2, {0.5, 0.5}, -10.0);
    ChannelMatrix gains{Matrix<double>(2, 2, 1.0), std::nullopt};
    CHECK_FALSE(no_fully_mixed_ne_2x2(gains, params));
  }

  SECTION("whenever the predicate fires, a pure reply beats any fully mixed profile") {
    const auto params = params_from_snr(2, 2, {0.5, 0.5}, 10.0);
    SplitMix64 rng(167);
    int fired = 0;
    for (int rep = 0; rep < 200 && fired < 10; ++rep) {
      const auto gains = draw_channels(params, {rng.next()});
      if (!no_fully_mixed_ne_2x2(gains, params)) continue;
      ++fired;
      for (int i = 1; i < 100; ++i) {
        for (int j = 1; j < 100; ++j) {
          MixedProfile mixed{Matrix<double>(2, 2)};
          mixed.q(0, 0) = i / 100.0;
          mixed.q(0, 1) = 1.0 - i / 100.0;
          mixed.q(1, 0) = j / 100.0;
          mixed.q(1, 1) = 1.0 - j / 100.0;
          bool improving = false;
          for (int k = 0; k < 2 && !improving; ++k) {
            const double current = mixed_utility(mixed, gains, params, k);
            for (int s = 0; s < 2 && !improving; ++s) {
              MixedProfile pure = mixed;
              pure.q(static_cast<std::size_t>(k), 0) = s == 0 ? 1.0 : 0.0;
              pure.q(static_cast<std::size_t>(k), 1) = s == 1 ? 1.0 : 0.0;
              improving =
                  mixed_utility(pure, gains, params, k) > current;
            }
          }
          REQUIRE(improving);
        }
      }
    }
    REQUIRE(fired >= 5);
  }

  SECTION("rejects other game sizes") {
    const auto params = params_from_snr(3, 2, {0.5, 0.5}, 10.0);
    const auto gains = draw_channels(params, {1});
    CHECK_THROWS_AS(no_fully_mixed_ne_2x2(gains, params),
                    std::invalid_argument);
  }
}

TEST_CASE("mixed operations refuse oversized strategy sets") {
  const auto params = params_from_snr(30, 2, {0.5, 0.5}, 10.0);
  const auto gains = draw_channels(params, {1});
  MixedProfile mixed{Matrix<double>(30, 2, 0.5)};
  CHECK_THROWS_AS(mixed_potential(mixed, gains, params), EnumerationCapError);
  CHECK_THROWS_AS(mixed_utility(mixed, gains, params, 0), EnumerationCapError);
}

TEST_CASE("fraction and mixed validation") {
  const auto params = params_from_snr(2, 2, {0.5, 0.5}, 10.0);
  CHECK_THROWS_AS(nonatomic_potential({{0.5, 0.4}}, params),
                  std::invalid_argument);
  CHECK_THROWS_AS(nonatomic_potential({{1.5, -0.5}}, params),
                  std::invalid_argument);
  MixedProfile bad{Matrix<double>(2, 2, 0.4)};
  const auto gains = draw_channels(params, {1});
  CHECK_THROWS_AS(mixed_potential(bad, gains, params), std::invalid_argument);
  CHECK_THROWS_AS(empirical_fractions(params, {1}, 0), std::invalid_argument);
}
