// Copyright 2026 smc-ebm authors
// SPDX-License-Identifier: Apache-2.0
//
// Resampling schemes: interval convention, hand traces, identity cases,
// unbiasedness, and the systematic scheme's within-one counting guarantee.
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "smcebm/resampling.hpp"
#include "smcebm/rng.hpp"

using namespace smcebm;

namespace {
const std::vector<double> kP{0.5, 0.25, 0.125, 0.125};
}

TEST_CASE("cumulative sum ends pinned at one") {
  const auto cum = cumulative_sum(kP);
  REQUIRE(cum.size() == 4);
  CHECK(cum[0] == doctest::Approx(0.5));
  CHECK(cum[1] == doctest::Approx(0.75));
  CHECK(cum[2] == doctest::Approx(0.875));
  CHECK(cum[3] == 1.0);  // forced exactly, so a draw of 1.0 always lands
}

TEST_CASE("draws select by right-closed intervals") {
  const auto cum = cumulative_sum(kP);
  // interval m is (P_{m-1}, P_m]: a draw exactly on a boundary takes the
  // earlier cell
  const std::vector<double> draws{1e-12, 0.5, 0.5000001, 0.75, 0.876, 1.0};
  const auto idx = select_from_draws(cum, draws);
  CHECK(idx == std::vector<int>{0, 0, 1, 1, 3, 3});
}

TEST_CASE("hand traces") {
  // stratified draws (0.1, 0.3, 0.6, 0.9) -> ancestors (0, 0, 1, 3)
  const auto cum = cumulative_sum(kP);
  CHECK(select_from_draws(cum, std::vector<double>{0.1, 0.3, 0.6, 0.9}) ==
        std::vector<int>{0, 0, 1, 3});
  // systematic with first draw 0.1: draws (0.1, 0.35, 0.6, 0.85)
  CHECK(systematic_select_from_u1(kP, 0.1) == std::vector<int>{0, 0, 1, 2});
}

TEST_CASE("uniform weights resample to the identity") {
  const std::vector<double> p(8, 0.125);
  for (std::uint64_t s = 0; s < 5; ++s) {
    CounterRng r1(s, Stream::resample);
    CounterRng r2(s, Stream::resample);
    std::vector<int> want(8);
    for (int i = 0; i < 8; ++i) want[i] = i;
    CHECK(systematic_select(p, r1) == want);
    CHECK(stratified_select(p, r2) == want);
  }
}

TEST_CASE("single-cell and single-draw edge cases") {
  const std::vector<double> one{1.0};
  CounterRng rng(2, Stream::resample);
  CHECK(multinomial_select(one, rng) == std::vector<int>{0});
  CHECK(stratified_select(one, rng) == std::vector<int>{0});
  CHECK(systematic_select(one, rng) == std::vector<int>{0});
}

TEST_CASE("all schemes are unbiased") {
  const int trials = 20000;
  double sums[3][4] = {};
  for (int t = 0; t < trials; ++t) {
    CounterRng rng(100, Stream::resample, static_cast<std::uint64_t>(t));
    const auto mi = multinomial_select(kP, rng);
    const auto st = stratified_select(kP, rng);
    const auto sy = systematic_select(kP, rng);
    for (int i : mi) sums[0][i] += 1.0;
    for (int i : st) sums[1][i] += 1.0;
    for (int i : sy) sums[2][i] += 1.0;
  }
  for (int s = 0; s < 3; ++s) {
    for (int i = 0; i < 4; ++i) {
      const double want = 4.0 * kP[i];
      const double got = sums[s][i] / trials;
      // 3 sigma under the largest (multinomial) per-trial variance
      const double se = std::sqrt(4.0 * kP[i] * (1.0 - kP[i]) / trials);
      CHECK(std::abs(got - want) < 3.0 * se);
    }
  }
}

TEST_CASE("systematic counts stay within one of the expectation") {
  CounterRng wrng(7, Stream::generic);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 3 + static_cast<int>(wrng.uniform() * 10.0);
    std::vector<double> p(static_cast<std::size_t>(n));
    double tot = 0.0;
    for (auto& v : p) {
      v = -std::log(wrng.uniform());
      tot += v;
    }
    for (auto& v : p) v /= tot;
    CounterRng rng(8, Stream::resample, static_cast<std::uint64_t>(rep));
    const auto idx = systematic_select(p, rng);
    std::vector<int> count(static_cast<std::size_t>(n), 0);
    for (int i : idx) ++count[static_cast<std::size_t>(i)];
    for (int i = 0; i < n; ++i) {
      const double expect = n * p[static_cast<std::size_t>(i)];
      CHECK(count[static_cast<std::size_t>(i)] >= std::floor(expect) - 1e-9);
      CHECK(count[static_cast<std::size_t>(i)] <= std::ceil(expect) + 1e-9);
    }
  }
}

TEST_CASE("scheme dispatch and naming") {
  CounterRng r1(3, Stream::resample);
  CounterRng r2(3, Stream::resample);
  CHECK(resample_indices(Resampler::systematic, kP, r1) ==
        systematic_select(kP, r2));
  CounterRng r3(3, Stream::resample);
  CounterRng r4(3, Stream::resample);
  CHECK(resample_indices(Resampler::multinomial, kP, r3) ==
        multinomial_select(kP, r4));

  CHECK(parse_resampler("systematic") == Resampler::systematic);
  CHECK(parse_resampler("stratified") == Resampler::stratified);
  CHECK(parse_resampler("multinomial") == Resampler::multinomial);
  CHECK(resampler_name(Resampler::stratified) == "stratified");
  CHECK_THROWS_AS((void)parse_resampler("bogus"), std::invalid_argument);
}
