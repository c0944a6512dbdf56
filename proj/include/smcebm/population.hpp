// Copyright 2026 The smcebm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "smcebm/energy.hpp"
#include "smcebm/resampling.hpp"
#include "smcebm/rng.hpp"

namespace smcebm {

// A weighted walker ensemble. log_weights holds the running log importance
// weights A^i; log_z_offset accumulates log(mean e^A) folded in at each
// resample so the partition-function estimate stays continuous across
// resampling events. Immediately after initialization or a resample all
// log_weights are zero and the effective sample size is 1.
struct Population {
  int dim = 0;
  std::vector<double> positions;    // count x dim, row-major
  std::vector<double> log_weights;  // one A per walker
  double log_z_offset = 0.0;

  Population() = default;
  Population(int dim_, int count_)
      : dim(dim_),
        positions(static_cast<std::size_t>(dim_) * count_, 0.0),
        log_weights(static_cast<std::size_t>(count_), 0.0) {}

  int count() const { return static_cast<int>(log_weights.size()); }
  std::span<double> x(int i) {
    return {positions.data() + static_cast<std::size_t>(i) * dim,
            static_cast<std::size_t>(dim)};
  }
  std::span<const double> x(int i) const {
    return {positions.data() + static_cast<std::size_t>(i) * dim,
            static_cast<std::size_t>(dim)};
  }
};

// log(sum_i e^{a_i}) and log(mean_i e^{a_i}), computed against the running
// maximum with compensated summation. Empty input is a usage error.
double logsumexp(std::span<const double> a);
double logmeanexp(std::span<const double> a);

// N walkers drawn exactly from the model density at theta. Each walker uses
// its own counter stream keyed by (seed, walker index), so the result is
// independent of thread count. Requires the model to expose an exact sampler.
Population init_population(const EnergyModel& model,
                           std::span<const double> theta, int count,
                           std::uint64_t seed);

// softmax of the log weights; sums to 1 up to roundoff.
std::vector<double> normalized_weights(const Population& pop);

// Effective sample size, (mean e^A)^2 / mean e^{2A}, in [1/N, 1]. Equals 1
// exactly when all weights are equal; invariant under common shifts of A.
double ess(const Population& pop);

// Cross-entropy gradient estimate: sum_i p_i grad_theta U(X^i) minus the
// unweighted data mean of grad_theta U. `data` may be a mini-batch.
std::vector<double> grad_estimator(const Population& pop,
                                   const EnergyModel& model,
                                   std::span<const double> theta,
                                   const Dataset& data);

// log Z estimate: log_z_theta0 + log_z_offset + logmeanexp(A).
double log_partition_estimate(const Population& pop, double log_z_theta0);

// Cross-entropy estimate: log-partition estimate plus the mean data energy.
double cross_entropy_estimate(const Population& pop, const EnergyModel& model,
                              std::span<const double> theta,
                              const Dataset& data, double log_z_theta0);

// Unconditional resample: fold logmeanexp(A) into log_z_offset, pick N
// ancestors by `scheme` from the normalized weights, copy their positions,
// zero all weights. The chosen ancestor indices are reported through
// `ancestors` when non-null.
void resample_now(Population& pop, Resampler scheme, CounterRng& rng,
                  std::vector<int>* ancestors = nullptr);

// Resample only if ESS < ess_threshold (strict; ties do not trigger).
// Requires ess_threshold in [0, 1). Returns whether a resample occurred.
bool maybe_resample(Population& pop, double ess_threshold, Resampler scheme,
                    CounterRng& rng, std::vector<int>* ancestors = nullptr);

// One row per walker: x_1,...,x_d,A as round-trippable decimals.
void dump_walkers(const Population& pop, std::ostream& os);

}  // namespace smcebm
