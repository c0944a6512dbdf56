// Copyright 2026 The smcebm Authors
// SPDX-License-Identifier: Apache-2.0

#include "smcebm/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "smcebm/dynamics.hpp"
#include "smcebm/parallel.hpp"

namespace smcebm {

namespace {

bool all_finite(std::span<const double> v) {
  for (const double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// Index in [0, m) from one uniform draw on (0,1].
std::int64_t draw_index(CounterRng& rng, std::int64_t m) {
  const double u = rng.uniform();
  const auto idx =
      static_cast<std::int64_t>(std::ceil(u * static_cast<double>(m))) - 1;
  return std::clamp<std::int64_t>(idx, 0, m - 1);
}

// Mean model energy over the data; blocked partials reduced in block order.
double data_mean_energy(const EnergyModel& model, std::span<const double> theta,
                        const Dataset& data) {
  const std::int64_t n = data.size();
  std::vector<double> part(static_cast<std::size_t>(block_count(n)), 0.0);
  parallel_for(n, [&](std::int64_t lo, std::int64_t hi) {
    double acc = 0.0;
    for (std::int64_t j = lo; j < hi; ++j)
      acc += model.energy(theta, data.point(j));
    part[static_cast<std::size_t>(lo / kParallelBlock)] = acc;
  });
  double sum = 0.0;
  for (const double v : part) sum += v;
  return sum / static_cast<double>(n);
}

// Data mini-batches without replacement; reshuffles at each epoch boundary
// and drops a trailing remainder smaller than the batch.
class EpochSampler {
 public:
  EpochSampler(std::int64_t n, std::uint64_t seed)
      : perm_(static_cast<std::size_t>(n)),
        cursor_(n),
        rng_(seed, Stream::batch_select, 1) {
    std::iota(perm_.begin(), perm_.end(), std::int64_t{0});
  }

  Dataset next(const Dataset& data, std::int64_t batch) {
    const auto n = static_cast<std::int64_t>(perm_.size());
    if (cursor_ + batch > n) {
      for (std::int64_t i = 0; i + 1 < n; ++i) {
        const std::int64_t j = i + draw_index(rng_, n - i);
        std::swap(perm_[static_cast<std::size_t>(i)],
                  perm_[static_cast<std::size_t>(j)]);
      }
      cursor_ = 0;
    }
    Dataset out;
    out.dim = data.dim;
    out.flat.reserve(static_cast<std::size_t>(batch) * data.dim);
    for (std::int64_t b = 0; b < batch; ++b) {
      const auto p = data.point(perm_[static_cast<std::size_t>(cursor_ + b)]);
      out.flat.insert(out.flat.end(), p.begin(), p.end());
    }
    cursor_ += batch;
    return out;
  }

 private:
  std::vector<std::int64_t> perm_;
  std::int64_t cursor_;
  CounterRng rng_;
};

// Walkers placed at data points drawn with replacement, one independent
// stream per walker.
void init_walkers_at_data(Population& pop, const Dataset& data,
                          std::uint64_t seed) {
  const std::int64_t n = data.size();
  parallel_for(pop.count(), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      CounterRng rng(seed, Stream::walker_init, static_cast<std::uint64_t>(i));
      const auto p = data.point(draw_index(rng, n));
      auto xi = pop.x(static_cast<int>(i));
      std::copy(p.begin(), p.end(), xi.begin());
    }
  });
}

TrainRecord make_record(int k, const EnergyModel& model,
                        const std::vector<double>& theta, const Dataset& data,
                        bool weighted, const Population& pop, double log_z0,
                        double ess_pre, bool resampled) {
  TrainRecord rec;
  rec.k = k;
  rec.theta = theta;
  rec.resampled = resampled;
  const double dmean = data_mean_energy(model, theta, data);
  if (weighted) {
    rec.ess = ess_pre;
    rec.log_z_est = log_partition_estimate(pop, log_z0);
    rec.ce_est = rec.log_z_est + dmean;
  }
  if (const auto lz = model.exact_log_partition(theta))
    rec.ce_exact = *lz + dmean;
  if (const auto mm = model.mode_mass(theta)) rec.mode_mass = *mm;
  return rec;
}

// Gradient over the population (global weights), then the optimizer step.
// Returns false and fills the abort fields when something went non-finite;
// theta is left at its last validated value.
bool gradient_and_step(const EnergyModel& model, const Dataset& data,
                       const TrainConfig& cfg, int k, EpochSampler& batches,
                       std::int64_t batch_data, const Population& pop,
                       std::vector<double>& theta,
                       std::vector<double>& theta_prev, OptimizerState& opt,
                       TrainResult& res) {
  const Dataset* gdata = &data;
  Dataset dbatch;
  if (batch_data < data.size()) {
    dbatch = batches.next(data, batch_data);
    gdata = &dbatch;
  }
  const auto dir = grad_estimator(pop, model, theta, *gdata);
  if (!all_finite(dir)) {
    res.aborted = true;
    res.abort_reason = "non-finite gradient at iteration " + std::to_string(k);
    return false;
  }
  theta_prev = theta;
  optimizer_step(theta, dir, opt, cfg, model.z_index());
  if (!all_finite(theta)) {
    theta = theta_prev;
    res.aborted = true;
    res.abort_reason =
        "non-finite parameters at iteration " + std::to_string(k);
    return false;
  }
  return true;
}

bool walkers_ok(const std::vector<std::uint8_t>& bad, int k,
                TrainResult& res) {
  for (std::size_t i = 0; i < bad.size(); ++i) {
    if (bad[i]) {
      res.aborted = true;
      res.abort_reason = "non-finite walker state (walker " +
                         std::to_string(i) + ", iteration " +
                         std::to_string(k) + ")";
      return false;
    }
  }
  return true;
}

void check_theta0(const EnergyModel& model, std::span<const double> theta0,
                  const char* who) {
  if (theta0.size() != static_cast<std::size_t>(model.param_count()))
    throw std::invalid_argument(std::string(who) + ": theta0 has length " +
                                std::to_string(theta0.size()) + ", expected " +
                                std::to_string(model.param_count()));
}

}  // namespace

Algorithm parse_algorithm(std::string_view name) {
  if (name == "jarzynski") return Algorithm::jarzynski;
  if (name == "pcd") return Algorithm::pcd;
  if (name == "cd") return Algorithm::cd;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) +
                              "' (expected jarzynski|pcd|cd)");
}

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::jarzynski: return "jarzynski";
    case Algorithm::pcd: return "pcd";
    case Algorithm::cd: return "cd";
  }
  return "?";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) +
                              "' (expected sgd|adam)");
}

std::string_view optimizer_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::adam: return "adam";
  }
  return "?";
}

void validate_config(const TrainConfig& cfg, const EnergyModel& model,
                     const Dataset& data) {
  if (cfg.iterations < 0)
    throw std::invalid_argument("iteration count must be >= 0");
  if (!(cfg.h > 0.0)) throw std::invalid_argument("step size must be > 0");
  if (!(cfg.lr_mean > 0.0) || !(cfg.lr_z > 0.0))
    throw std::invalid_argument("learning rates must be > 0");
  if (cfg.walkers < 1)
    throw std::invalid_argument("need at least one walker");
  if (cfg.walker_batch < 0 || cfg.walker_batch > cfg.walkers)
    throw std::invalid_argument("walker batch must lie in [0, N]");
  const std::int64_t n = data.size();
  if (n < 1) throw std::invalid_argument("data set is empty");
  if (data.dim != model.dimension())
    throw std::invalid_argument("data dimension " + std::to_string(data.dim) +
                                " does not match model dimension " +
                                std::to_string(model.dimension()));
  if (cfg.data_batch < 0 || cfg.data_batch > n)
    throw std::invalid_argument("data batch must lie in [0, n]");
  if (!(cfg.ess_threshold >= 0.0) || cfg.ess_threshold >= 1.0)
    throw std::invalid_argument("ESS threshold must lie in [0, 1)");
  if (cfg.algorithm == Algorithm::cd && cfg.cd_steps < 1)
    throw std::invalid_argument("CD needs at least one inner ULA step");
  if (cfg.optimizer == OptimizerKind::adam) {
    if (!(cfg.adam_beta1 >= 0.0) || cfg.adam_beta1 >= 1.0 ||
        !(cfg.adam_beta2 >= 0.0) || cfg.adam_beta2 >= 1.0 ||
        !(cfg.adam_eps > 0.0))
      throw std::invalid_argument("adaptive optimizer hyperparameters out of "
                                  "range (betas in [0,1), eps > 0)");
  }
}

void optimizer_step(std::vector<double>& theta,
                    std::span<const double> direction, OptimizerState& state,
                    const TrainConfig& cfg, int z_index) {
  if (direction.size() != theta.size())
    throw std::invalid_argument("optimizer_step: direction has length " +
                                std::to_string(direction.size()) +
                                ", expected " + std::to_string(theta.size()));
  const auto rate = [&](std::size_t i) {
    return static_cast<int>(i) == z_index ? cfg.lr_z : cfg.lr_mean;
  };
  if (cfg.optimizer == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < theta.size(); ++i)
      theta[i] += rate(i) * direction[i];
    return;
  }
  if (state.m.empty()) {
    state.m.assign(theta.size(), 0.0);
    state.v.assign(theta.size(), 0.0);
  }
  state.t += 1;
  const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = cfg.adam_beta1 * state.m[i] +
                 (1.0 - cfg.adam_beta1) * direction[i];
    state.v[i] = cfg.adam_beta2 * state.v[i] +
                 (1.0 - cfg.adam_beta2) * direction[i] * direction[i];
    theta[i] += rate(i) * (state.m[i] / c1) /
                (std::sqrt(state.v[i] / c2) + cfg.adam_eps);
  }
}

TrainResult train_jarzynski(const EnergyModel& model,
                            std::span<const double> theta0,
                            const Dataset& data, const TrainConfig& cfg,
                            const RecordSink& sink) {
  validate_config(cfg, model, data);
  check_theta0(model, theta0, "train_jarzynski");

  const int n_walk = cfg.walkers;
  const int d = model.dimension();
  const std::int64_t n_data = data.size();
  const int batch_walkers = cfg.walker_batch == 0 ? n_walk : cfg.walker_batch;
  const std::int64_t batch_data =
      cfg.data_batch == 0 ? n_data : cfg.data_batch;

  TrainResult res;
  res.theta.assign(theta0.begin(), theta0.end());
  res.population = init_population(model, theta0, n_walk, cfg.seed);
  Population& pop = res.population;

  const double log_z0 = model.exact_log_partition(theta0).value_or(0.0);
  const double scale = std::sqrt(2.0 * cfg.h);

  OptimizerState opt;
  CounterRng rng_resample(cfg.seed, Stream::resample);
  CounterRng rng_wbatch(cfg.seed, Stream::batch_select, 0);
  EpochSampler data_batches(n_data, cfg.seed);

  std::vector<double>& theta = res.theta;
  std::vector<double> theta_prev;
  std::vector<std::uint8_t> moving;  // empty means every walker moves
  std::vector<int> batch_ids(static_cast<std::size_t>(n_walk));
  std::vector<std::uint8_t> bad(static_cast<std::size_t>(n_walk));
  res.history.reserve(static_cast<std::size_t>(cfg.iterations));

  for (int k = 1; k <= cfg.iterations; ++k) {
    if (!gradient_and_step(model, data, cfg, k, data_batches, batch_data, pop,
                           theta, theta_prev, opt, res))
      return res;

    if (batch_walkers < n_walk) {
      if (moving.empty()) moving.resize(static_cast<std::size_t>(n_walk));
      std::fill(moving.begin(), moving.end(), 0);
      std::iota(batch_ids.begin(), batch_ids.end(), 0);
      for (int i = 0; i < batch_walkers; ++i) {
        const int j =
            i + static_cast<int>(draw_index(rng_wbatch, n_walk - i));
        std::swap(batch_ids[static_cast<std::size_t>(i)],
                  batch_ids[static_cast<std::size_t>(j)]);
        moving[static_cast<std::size_t>(
            batch_ids[static_cast<std::size_t>(i)])] = 1;
      }
    }

    // Batched walkers take one ULA step under the pre-update parameters and
    // get the moving increment; frozen walkers get the energy difference.
    std::fill(bad.begin(), bad.end(), 0);
    parallel_for(n_walk, [&](std::int64_t lo, std::int64_t hi) {
      std::vector<double> gx(static_cast<std::size_t>(d));
      std::vector<double> xprev(static_cast<std::size_t>(d));
      for (std::int64_t i = lo; i < hi; ++i) {
        auto xi = pop.x(static_cast<int>(i));
        double& a = pop.log_weights[static_cast<std::size_t>(i)];
        if (moving.empty() || moving[static_cast<std::size_t>(i)]) {
          CounterRng noise(cfg.seed, Stream::walker_noise,
                           static_cast<std::uint64_t>(i),
                           static_cast<std::uint64_t>(k));
          const double e_old = model.energy_grad_x(theta_prev, xi, gx);
          std::copy(xi.begin(), xi.end(), xprev.begin());
          bool finite = true;
          for (int c = 0; c < d; ++c) {
            xi[c] = xprev[c] - cfg.h * gx[c] + scale * noise.normal();
            finite = finite && std::isfinite(xi[c]);
          }
          if (!finite) {
            bad[static_cast<std::size_t>(i)] = 1;
            continue;
          }
          const double a_old = alpha_from_parts(e_old, gx, xprev, xi, cfg.h);
          const double e_new = model.energy_grad_x(theta, xi, gx);
          const double a_new = alpha_from_parts(e_new, gx, xi, xprev, cfg.h);
          a += -a_new + a_old;
        } else {
          a += model.energy(theta_prev, xi) - model.energy(theta, xi);
        }
        if (!std::isfinite(a)) bad[static_cast<std::size_t>(i)] = 1;
      }
    });
    if (!walkers_ok(bad, k, res)) {
      theta = theta_prev;
      return res;
    }

    const double ess_pre = ess(pop);
    const bool resampled =
        maybe_resample(pop, cfg.ess_threshold, cfg.resampler, rng_resample);
    if (resampled) ++res.resample_count;

    res.history.push_back(make_record(k, model, theta, data,
                                      /*weighted=*/true, pop, log_z0, ess_pre,
                                      resampled));
    if (sink) sink(res.history.back());
  }
  return res;
}

TrainResult train_pcd(const EnergyModel& model, std::span<const double> theta0,
                      const Dataset& data, const TrainConfig& cfg,
                      const RecordSink& sink) {
  validate_config(cfg, model, data);
  check_theta0(model, theta0, "train_pcd");

  const int n_walk = cfg.walkers;
  const int d = model.dimension();
  const std::int64_t n_data = data.size();
  const std::int64_t batch_data =
      cfg.data_batch == 0 ? n_data : cfg.data_batch;

  TrainResult res;
  res.theta.assign(theta0.begin(), theta0.end());
  res.population = Population(d, n_walk);
  Population& pop = res.population;
  init_walkers_at_data(pop, data, cfg.seed);

  const double scale = std::sqrt(2.0 * cfg.h);
  OptimizerState opt;
  EpochSampler data_batches(n_data, cfg.seed);

  std::vector<double>& theta = res.theta;
  std::vector<double> theta_prev;
  std::vector<std::uint8_t> bad(static_cast<std::size_t>(n_walk));
  res.history.reserve(static_cast<std::size_t>(cfg.iterations));

  for (int k = 1; k <= cfg.iterations; ++k) {
    // All weights stay zero, so the estimator reduces to the plain mean.
    if (!gradient_and_step(model, data, cfg, k, data_batches, batch_data, pop,
                           theta, theta_prev, opt, res))
      return res;

    // One ULA step under the pre-update parameters; never reweighted.
    std::fill(bad.begin(), bad.end(), 0);
    parallel_for(n_walk, [&](std::int64_t lo, std::int64_t hi) {
      std::vector<double> gx(static_cast<std::size_t>(d));
      for (std::int64_t i = lo; i < hi; ++i) {
        auto xi = pop.x(static_cast<int>(i));
        CounterRng noise(cfg.seed, Stream::walker_noise,
                         static_cast<std::uint64_t>(i),
                         static_cast<std::uint64_t>(k));
        model.grad_x(theta_prev, xi, gx);
        bool finite = true;
        for (int c = 0; c < d; ++c) {
          xi[c] = xi[c] - cfg.h * gx[c] + scale * noise.normal();
          finite = finite && std::isfinite(xi[c]);
        }
        if (!finite) bad[static_cast<std::size_t>(i)] = 1;
      }
    });
    if (!walkers_ok(bad, k, res)) {
      theta = theta_prev;
      return res;
    }

    res.history.push_back(make_record(k, model, theta, data,
                                      /*weighted=*/false, pop, 0.0, 0.0,
                                      false));
    if (sink) sink(res.history.back());
  }
  return res;
}

TrainResult train_cd(const EnergyModel& model, std::span<const double> theta0,
                     const Dataset& data, const TrainConfig& cfg,
                     const RecordSink& sink) {
  validate_config(cfg, model, data);
  if (cfg.cd_steps < 1)
    throw std::invalid_argument("train_cd: need at least one inner ULA step");
  check_theta0(model, theta0, "train_cd");

  const int n_walk = cfg.walkers;
  const int d = model.dimension();
  const std::int64_t n_data = data.size();
  const std::int64_t batch_data =
      cfg.data_batch == 0 ? n_data : cfg.data_batch;

  TrainResult res;
  res.theta.assign(theta0.begin(), theta0.end());
  res.population = Population(d, n_walk);
  Population& pop = res.population;

  const double scale = std::sqrt(2.0 * cfg.h);
  OptimizerState opt;
  EpochSampler data_batches(n_data, cfg.seed);

  std::vector<double>& theta = res.theta;
  std::vector<double> theta_prev;
  std::vector<std::uint8_t> bad(static_cast<std::size_t>(n_walk));
  res.history.reserve(static_cast<std::size_t>(cfg.iterations));

  for (int k = 1; k <= cfg.iterations; ++k) {
    // Restart every walker at a data point, then run the inner ULA chain
    // under the current parameters.
    std::fill(bad.begin(), bad.end(), 0);
    parallel_for(n_walk, [&](std::int64_t lo, std::int64_t hi) {
      std::vector<double> gx(static_cast<std::size_t>(d));
      for (std::int64_t i = lo; i < hi; ++i) {
        CounterRng restart(cfg.seed, Stream::cd_restart,
                           static_cast<std::uint64_t>(i),
                           static_cast<std::uint64_t>(k));
        const auto p = data.point(draw_index(restart, n_data));
        auto xi = pop.x(static_cast<int>(i));
        std::copy(p.begin(), p.end(), xi.begin());

        CounterRng noise(cfg.seed, Stream::walker_noise,
                         static_cast<std::uint64_t>(i),
                         static_cast<std::uint64_t>(k));
        for (int step = 0; step < cfg.cd_steps; ++step) {
          model.grad_x(theta, xi, gx);
          bool finite = true;
          for (int c = 0; c < d; ++c) {
            xi[c] = xi[c] - cfg.h * gx[c] + scale * noise.normal();
            finite = finite && std::isfinite(xi[c]);
          }
          if (!finite) {
            bad[static_cast<std::size_t>(i)] = 1;
            break;
          }
        }
      }
    });
    if (!walkers_ok(bad, k, res)) return res;

    if (!gradient_and_step(model, data, cfg, k, data_batches, batch_data, pop,
                           theta, theta_prev, opt, res))
      return res;

    res.history.push_back(make_record(k, model, theta, data,
                                      /*weighted=*/false, pop, 0.0, 0.0,
                                      false));
    if (sink) sink(res.history.back());
  }
  return res;
}

TrainResult train(const EnergyModel& model, std::span<const double> theta0,
                  const Dataset& data, const TrainConfig& cfg,
                  const RecordSink& sink) {
  switch (cfg.algorithm) {
    case Algorithm::jarzynski:
      return train_jarzynski(model, theta0, data, cfg, sink);
    case Algorithm::pcd:
      return train_pcd(model, theta0, data, cfg, sink);
    case Algorithm::cd:
      return train_cd(model, theta0, data, cfg, sink);
  }
  throw std::invalid_argument("train: bad algorithm kind");
}

}  // namespace smcebm
