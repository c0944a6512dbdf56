// Copyright 2026 The smcebm Authors
// SPDX-License-Identifier: Apache-2.0

#include "smcebm/population.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "smcebm/format.hpp"
#include "smcebm/parallel.hpp"

namespace smcebm {

namespace {

// Neumaier-compensated accumulator; summation order is always index order,
// so totals are reproducible bit for bit.
struct Kahan {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      c += (sum - t) + v;
    else
      c += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

double max_of(std::span<const double> a) {
  double m = a[0];
  for (const double v : a) m = std::max(m, v);
  return m;
}

}  // namespace

double logsumexp(std::span<const double> a) {
  if (a.empty()) throw std::invalid_argument("logsumexp: empty input");
  const double m = max_of(a);
  if (!std::isfinite(m)) return m;  // all -inf, or a nan/inf contaminant
  Kahan s;
  for (const double v : a) s.add(std::exp(v - m));
  return m + std::log(s.value());
}

double logmeanexp(std::span<const double> a) {
  return logsumexp(a) - std::log(static_cast<double>(a.size()));
}

Population init_population(const EnergyModel& model,
                           std::span<const double> theta, int count,
                           std::uint64_t seed) {
  if (count < 1)
    throw std::invalid_argument("init_population: need at least one walker");
  if (!model.has_exact_sampler())
    throw std::invalid_argument("init_population: model '" +
                                std::string(model.name()) +
                                "' has no exact sampler");
  Population pop(model.dimension(), count);
  parallel_for(count, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      CounterRng rng(seed, Stream::walker_init, static_cast<std::uint64_t>(i));
      model.sample_exact(theta, rng, pop.x(static_cast<int>(i)));
    }
  });
  return pop;
}

std::vector<double> normalized_weights(const Population& pop) {
  const auto& a = pop.log_weights;
  const double m = max_of(a);
  std::vector<double> p(a.size());
  Kahan s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    p[i] = std::exp(a[i] - m);
    s.add(p[i]);
  }
  const double inv = 1.0 / s.value();
  for (auto& v : p) v *= inv;
  return p;
}

double ess(const Population& pop) {
  const auto& a = pop.log_weights;
  const double m = max_of(a);
  Kahan s1, s2;
  for (const double v : a) {
    const double e = std::exp(v - m);
    s1.add(e);
    s2.add(e * e);
  }
  const double n = static_cast<double>(a.size());
  return (s1.value() * s1.value()) / (s2.value() * n);
}

std::vector<double> grad_estimator(const Population& pop,
                                   const EnergyModel& model,
                                   std::span<const double> theta,
                                   const Dataset& data) {
  const std::size_t np = static_cast<std::size_t>(model.param_count());
  const auto p = normalized_weights(pop);

  // Per-block partial sums, then an ordered serial reduction: the grouping is
  // fixed by kParallelBlock, so the result is identical for any thread count.
  const std::int64_t wblocks = block_count(pop.count());
  std::vector<double> wpart(static_cast<std::size_t>(wblocks) * np, 0.0);
  parallel_for(pop.count(), [&](std::int64_t lo, std::int64_t hi) {
    double* row = wpart.data() + static_cast<std::size_t>(lo / kParallelBlock) * np;
    std::vector<double> gt(np);
    for (std::int64_t i = lo; i < hi; ++i) {
      model.grad_theta(theta, pop.x(static_cast<int>(i)), gt);
      const double w = p[static_cast<std::size_t>(i)];
      for (std::size_t k = 0; k < np; ++k) row[k] += w * gt[k];
    }
  });

  const std::int64_t n = data.size();
  const std::int64_t dblocks = block_count(n);
  std::vector<double> dpart(static_cast<std::size_t>(dblocks) * np, 0.0);
  parallel_for(n, [&](std::int64_t lo, std::int64_t hi) {
    double* row = dpart.data() + static_cast<std::size_t>(lo / kParallelBlock) * np;
    std::vector<double> gt(np);
    for (std::int64_t j = lo; j < hi; ++j) {
      model.grad_theta(theta, data.point(j), gt);
      for (std::size_t k = 0; k < np; ++k) row[k] += gt[k];
    }
  });

  std::vector<double> out(np, 0.0);
  for (std::int64_t b = 0; b < wblocks; ++b)
    for (std::size_t k = 0; k < np; ++k)
      out[k] += wpart[static_cast<std::size_t>(b) * np + k];
  const double n_inv = 1.0 / static_cast<double>(n);
  std::vector<double> dsum(np, 0.0);
  for (std::int64_t b = 0; b < dblocks; ++b)
    for (std::size_t k = 0; k < np; ++k)
      dsum[k] += dpart[static_cast<std::size_t>(b) * np + k];
  for (std::size_t k = 0; k < np; ++k) out[k] -= n_inv * dsum[k];
  return out;
}

double log_partition_estimate(const Population& pop, double log_z_theta0) {
  if (!std::isfinite(log_z_theta0))
    throw std::invalid_argument(
        "log_partition_estimate: log Z at theta_0 must be finite");
  return log_z_theta0 + pop.log_z_offset + logmeanexp(pop.log_weights);
}

double cross_entropy_estimate(const Population& pop, const EnergyModel& model,
                              std::span<const double> theta,
                              const Dataset& data, double log_z_theta0) {
  const std::int64_t n = data.size();
  const std::int64_t blocks = block_count(n);
  std::vector<double> part(static_cast<std::size_t>(blocks), 0.0);
  parallel_for(n, [&](std::int64_t lo, std::int64_t hi) {
    double acc = 0.0;
    for (std::int64_t j = lo; j < hi; ++j)
      acc += model.energy(theta, data.point(j));
    part[static_cast<std::size_t>(lo / kParallelBlock)] = acc;
  });
  double esum = 0.0;
  for (const double v : part) esum += v;
  return log_partition_estimate(pop, log_z_theta0) +
         esum / static_cast<double>(n);
}

void resample_now(Population& pop, Resampler scheme, CounterRng& rng,
                  std::vector<int>* ancestors) {
  pop.log_z_offset += logmeanexp(pop.log_weights);
  const auto p = normalized_weights(pop);
  auto idx = resample_indices(scheme, p, rng);

  std::vector<double> next(pop.positions.size());
  const std::size_t d = static_cast<std::size_t>(pop.dim);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double* src =
        pop.positions.data() + static_cast<std::size_t>(idx[i]) * d;
    std::copy(src, src + d, next.data() + i * d);
  }
  pop.positions.swap(next);
  std::fill(pop.log_weights.begin(), pop.log_weights.end(), 0.0);
  if (ancestors) *ancestors = std::move(idx);
}

bool maybe_resample(Population& pop, double ess_threshold, Resampler scheme,
                    CounterRng& rng, std::vector<int>* ancestors) {
  if (!(ess_threshold >= 0.0) || ess_threshold >= 1.0)
    throw std::invalid_argument(
        "maybe_resample: ESS threshold must lie in [0, 1)");
  if (!(ess(pop) < ess_threshold)) return false;
  resample_now(pop, scheme, rng, ancestors);
  return true;
}

void dump_walkers(const Population& pop, std::ostream& os) {
  for (int c = 0; c < pop.dim; ++c) os << 'x' << '_' << (c + 1) << ',';
  os << "A\n";
  for (int i = 0; i < pop.count(); ++i) {
    const auto xi = pop.x(i);
    for (int c = 0; c < pop.dim; ++c) os << g17(xi[c]) << ',';
    os << g17(pop.log_weights[i]) << '\n';
  }
}

}  // namespace smcebm
