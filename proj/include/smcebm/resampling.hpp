// Copyright 2026 The smcebm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smcebm/rng.hpp"

namespace smcebm {

enum class Resampler { multinomial, stratified, systematic };

// Throws std::invalid_argument for anything other than
// "multinomial" | "stratified" | "systematic".
Resampler parse_resampler(std::string_view name);
std::string_view resampler_name(Resampler scheme);

// Cumulative sums P_m of a probability vector. Entries must be nonnegative
// and sum to 1 within 1e-9 (usage error otherwise); the final entry is
// forced to exactly 1 so that inversion of a draw from (0,1] always lands.
std::vector<double> cumulative_sum(std::span<const double> p);

// Deterministic selection core: for each draw u in (0,1], the chosen ancestor
// is the smallest m with u <= P_m, i.e. P_{m-1} < u <= P_m (right-closed).
// Ties at interval endpoints resolve to the leftmost index of the tied block,
// so zero-probability ancestors are never selected. Indices are 0-based.
std::vector<int> select_from_draws(std::span<const double> cumulative,
                                   std::span<const double> draws);

// N independent draws from (0,1].
std::vector<int> multinomial_select(std::span<const double> p, CounterRng& rng);

// One independent draw per stratum: u_n in (n/N, (n+1)/N] for n = 0..N-1.
std::vector<int> stratified_select(std::span<const double> p, CounterRng& rng);

// A single draw u_1 in (0, 1/N] shifted through the strata: u_n = u_1 + n/N.
// Consumes exactly one uniform; counts of ancestor i are floor(N p_i) or
// ceil(N p_i).
std::vector<int> systematic_select(std::span<const double> p, CounterRng& rng);

// Deterministic systematic selection from a given first offset (test hook).
// Requires 0 < u1 <= 1/N.
std::vector<int> systematic_select_from_u1(std::span<const double> p,
                                           double u1);

// Dispatch on the scheme enum.
std::vector<int> resample_indices(Resampler scheme, std::span<const double> p,
                                  CounterRng& rng);

}  // namespace smcebm
