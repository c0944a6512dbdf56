// Copyright 2026 The smcebm Authors
// SPDX-License-Identifier: Apache-2.0

#include "smcebm/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smcebm {

Resampler parse_resampler(std::string_view name) {
  if (name == "multinomial") return Resampler::multinomial;
  if (name == "stratified") return Resampler::stratified;
  if (name == "systematic") return Resampler::systematic;
  throw std::invalid_argument("unknown resampler '" + std::string(name) +
                              "' (expected multinomial|stratified|systematic)");
}

std::string_view resampler_name(Resampler scheme) {
  switch (scheme) {
    case Resampler::multinomial: return "multinomial";
    case Resampler::stratified: return "stratified";
    case Resampler::systematic: return "systematic";
  }
  return "?";
}

std::vector<double> cumulative_sum(std::span<const double> p) {
  if (p.empty())
    throw std::invalid_argument("cumulative_sum: empty probability vector");
  std::vector<double> cum(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0))
      throw std::invalid_argument(
          "cumulative_sum: negative probability at index " +
          std::to_string(i));
    acc += p[i];
    cum[i] = acc;
  }
  if (std::abs(acc - 1.0) > 1e-9)
    throw std::invalid_argument("cumulative_sum: probabilities sum to " +
                                std::to_string(acc) + ", expected 1");
  cum.back() = 1.0;
  return cum;
}

std::vector<int> select_from_draws(std::span<const double> cumulative,
                                   std::span<const double> draws) {
  std::vector<int> idx(draws.size());
  for (std::size_t n = 0; n < draws.size(); ++n) {
    const double u = draws[n];
    if (!(u > 0.0) || u > 1.0)
      throw std::invalid_argument("select_from_draws: draw " +
                                  std::to_string(u) + " outside (0,1]");
    const auto it =
        std::lower_bound(cumulative.begin(), cumulative.end(), u);
    idx[n] = static_cast<int>(it - cumulative.begin());
  }
  return idx;
}

std::vector<int> multinomial_select(std::span<const double> p,
                                    CounterRng& rng) {
  const auto cum = cumulative_sum(p);
  std::vector<double> draws(p.size());
  for (auto& u : draws) u = rng.uniform();
  return select_from_draws(cum, draws);
}

std::vector<int> stratified_select(std::span<const double> p,
                                   CounterRng& rng) {
  const auto cum = cumulative_sum(p);
  const double n_inv = 1.0 / static_cast<double>(p.size());
  std::vector<double> draws(p.size());
  for (std::size_t n = 0; n < p.size(); ++n)
    draws[n] = (static_cast<double>(n) + rng.uniform()) * n_inv;
  draws.back() = std::min(draws.back(), 1.0);
  return select_from_draws(cum, draws);
}

std::vector<int> systematic_select(std::span<const double> p,
                                   CounterRng& rng) {
  const double u1 = rng.uniform() / static_cast<double>(p.size());
  return systematic_select_from_u1(p, u1);
}

std::vector<int> systematic_select_from_u1(std::span<const double> p,
                                           double u1) {
  const auto cum = cumulative_sum(p);
  const double n_inv = 1.0 / static_cast<double>(p.size());
  if (!(u1 > 0.0) || u1 > n_inv)
    throw std::invalid_argument(
        "systematic_select_from_u1: u1 must lie in (0, 1/N]");
  std::vector<double> draws(p.size());
  for (std::size_t n = 0; n < p.size(); ++n)
    draws[n] = u1 + static_cast<double>(n) * n_inv;
  draws.back() = std::min(draws.back(), 1.0);
  return select_from_draws(cum, draws);
}

std::vector<int> resample_indices(Resampler scheme, std::span<const double> p,
                                  CounterRng& rng) {
  switch (scheme) {
    case Resampler::multinomial: return multinomial_select(p, rng);
    case Resampler::stratified: return stratified_select(p, rng);
    case Resampler::systematic: return systematic_select(p, rng);
  }
  throw std::invalid_argument("resample_indices: bad scheme");
}

}  // namespace smcebm
