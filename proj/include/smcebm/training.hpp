// Copyright 2026 The smcebm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "smcebm/energy.hpp"
#include "smcebm/population.hpp"
#include "smcebm/resampling.hpp"

namespace smcebm {

enum class Algorithm { jarzynski, pcd, cd };
enum class OptimizerKind { sgd, adam };

Algorithm parse_algorithm(std::string_view name);
std::string_view algorithm_name(Algorithm a);
OptimizerKind parse_optimizer(std::string_view name);
std::string_view optimizer_name(OptimizerKind kind);

// Knobs shared by the three trainers. walker_batch == 0 means every walker
// moves each iteration (the full-batch algorithm); data_batch == 0 means the
// gradient's data term uses the whole data set.
struct TrainConfig {
  Algorithm algorithm = Algorithm::jarzynski;
  int iterations = 0;  // optimizer steps; 0 returns the initial state
  double h = 0.1;      // ULA step size
  double lr_mean = 0.2;
  double lr_z = 1.0;  // learning rate for the log-odds parameter, if any
  int walkers = 1000;
  int walker_batch = 0;  // only these many walkers move; all weights update
  int data_batch = 0;    // mini-batch for the data term, without replacement
  Resampler resampler = Resampler::systematic;
  double ess_threshold = 1.0 / 1.05;  // resample when ESS < this; in [0,1)
  int cd_steps = 4;                   // inner ULA steps per CD iteration
  std::uint64_t seed = 1;
  OptimizerKind optimizer = OptimizerKind::sgd;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

// Throws std::invalid_argument for out-of-range settings (including
// cd_steps < 1 when the algorithm is CD).
void validate_config(const TrainConfig& cfg, const EnergyModel& model,
                     const Dataset& data);

// One row per completed iteration k = 1..K. theta is the post-update value;
// ess is measured before any resample that iteration; the estimates are
// computed after it (they are continuous across resamples by construction).
// Fields an algorithm or model does not define are NaN: ess / log_z_est /
// ce_est exist only for the weighted trainer, ce_exact needs an exact
// partition function, mode_mass needs a log-odds parameter.
struct TrainRecord {
  int k = 0;
  std::vector<double> theta;
  double ess = std::numeric_limits<double>::quiet_NaN();
  double log_z_est = std::numeric_limits<double>::quiet_NaN();
  double ce_est = std::numeric_limits<double>::quiet_NaN();
  double ce_exact = std::numeric_limits<double>::quiet_NaN();
  double mode_mass = std::numeric_limits<double>::quiet_NaN();
  bool resampled = false;
};

// On a numerical blowup the run aborts: `history` keeps the records of all
// completed iterations, `theta` is the last parameter vector that was fully
// validated, and `population` is left as-is for inspection.
struct TrainResult {
  std::vector<double> theta;
  Population population;
  std::vector<TrainRecord> history;
  bool aborted = false;
  std::string abort_reason;
  int resample_count = 0;
};

struct OptimizerState {
  std::vector<double> m;  // first moment (adaptive mode only)
  std::vector<double> v;  // second moment
  long t = 0;
};

// theta[i] += rate(i) * direction[i], where rate(i) is lr_z at z_index and
// lr_mean elsewhere; `direction` is the ascent direction for theta (the
// descent direction of the cross-entropy). Adaptive mode runs the standard
// bias-corrected first/second-moment update with the same sign convention.
void optimizer_step(std::vector<double>& theta,
                    std::span<const double> direction, OptimizerState& state,
                    const TrainConfig& cfg, int z_index);

// Called once per record as it is produced, for incremental persistence.
using RecordSink = std::function<void(const TrainRecord&)>;

// Weighted sequential Monte-Carlo trainer. Walkers start as exact draws from
// the model at theta0. Per iteration: gradient over ALL walkers with global
// normalized weights, optimizer step, then the walkers of this iteration's
// batch take a ULA step under the pre-update parameters and receive the
// moving weight increment while the rest receive the frozen one, then the
// population is resampled if its effective sample size dropped below the
// threshold.
TrainResult train_jarzynski(const EnergyModel& model,
                            std::span<const double> theta0,
                            const Dataset& data, const TrainConfig& cfg,
                            const RecordSink& sink = {});

// Persistent contrastive divergence: walkers start at data points drawn with
// replacement and evolve by plain ULA, one step per iteration, taken under
// the pre-update parameters; they are never reweighted.
TrainResult train_pcd(const EnergyModel& model, std::span<const double> theta0,
                      const Dataset& data, const TrainConfig& cfg,
                      const RecordSink& sink = {});

// Contrastive divergence: each iteration restarts the walkers at data points
// drawn with replacement and runs cd_steps ULA steps under the current
// parameters before the unweighted gradient is taken.
TrainResult train_cd(const EnergyModel& model, std::span<const double> theta0,
                     const Dataset& data, const TrainConfig& cfg,
                     const RecordSink& sink = {});

// Dispatch on cfg.algorithm.
TrainResult train(const EnergyModel& model, std::span<const double> theta0,
                  const Dataset& data, const TrainConfig& cfg,
                  const RecordSink& sink = {});

}  // namespace smcebm
