// Copyright 2026 The smcebm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment runner: materializes a validated config into a run directory.
// A run directory contains
//   config.ini       resolved configuration (re-parseable, seed included)
//   diagnostics.csv  per-iteration columns: k, ess, log_z_est, ce_est,
//                    ce_exact, p_k, resampled [, theta_* for small models]
//   walkers.csv      final walker positions and log-weights
//   theta.csv        final parameter vector, one value per line
//   summary.txt      key = value summary (p_final, errors, KL, status)
// Dynamics runs write dynamics_<regime>.csv / walkers_<regime>.csv instead,
// with per-regime summary keys. Everything is deterministic given the config,
// independent of thread count; files carry no timestamps.

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "smcebm/config.hpp"

namespace smcebm {

inline constexpr std::string_view kCodeVersion = "0.1.0";

// Runs the experiment, writing artifacts under cfg.out_dir. Returns 0 on
// success or 3 after a numerical abort (partial records are already on
// disk). Configuration problems throw ConfigError; the CLI maps those to
// exit code 2.
int run_experiment(const ExperimentConfig& cfg, std::ostream& err);

// Builds the student's initial parameter vector: pinned first mean
// coordinates, the other coordinates perturb_scale * standard normal from
// the parameter-init stream in flat-index order, log-odds from init.z.
std::vector<double> initial_theta(const ExperimentConfig& cfg,
                                  const EnergyModel& model);

// Draws n points from the model at theta, one counter sub-stream per point.
Dataset sample_dataset(const EnergyModel& model, std::span<const double> theta,
                       std::int64_t n, std::uint64_t seed);

// Loads a headerless CSV of `dim` columns; '#' lines are skipped and a
// single leading header line is tolerated. Errors carry the line number.
Dataset load_dataset(const std::string& path, int dim);

// One row per run directory: algorithm, final mode mass, mean errors, final
// KL. All runs must share the teacher (model name, dimension, teacher
// parameters); mismatches and an empty list are usage errors (ConfigError).
std::string compare_runs(const std::vector<std::string>& dirs);

}  // namespace smcebm
