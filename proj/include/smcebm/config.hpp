// Copyright 2026 The smcebm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: a flat INI-style key/value format with sections.
// Unknown sections or keys are rejected with the offending line number, and
// to_ini() round-trips losslessly (doubles are written with 17 significant
// digits). Missing keys keep their defaults, so partial files are valid.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "smcebm/analysis.hpp"
#include "smcebm/training.hpp"

namespace smcebm {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class ExperimentKind { train, dynamics1d };
ExperimentKind parse_kind(std::string_view name);
std::string_view kind_name(ExperimentKind k);

// The data-generating model. For "gmm" the teacher means are
// (a1, 0, ..., 0) and (b1, 0, ..., 0); for "gmm1d-z" a1 and b1 are the
// frozen means and z is the only parameter; for "gaussian" the teacher mean
// is (a1, 0, ..., 0).
struct ModelSpec {
  std::string name = "gmm";
  int dim = 1;
  double teacher_a1 = -10.0;
  double teacher_b1 = 6.0;
  double teacher_z = -1.0986122886681098;  // -log 3: mode a carries mass 1/4

  std::vector<double> teacher_theta() const;
};

// Student initialization: first mean coordinates pinned, the remaining
// coordinates drawn as perturb_scale * standard normal (their own stream),
// log-odds started at z.
struct InitSpec {
  double a1 = -0.1;
  double b1 = 0.1;
  double z = 0.0;
  double perturb_scale = 0.01;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::train;
  std::string preset;  // informational; recorded in the resolved config
  ModelSpec model;
  std::int64_t n_data = 1000;
  std::string data_file;  // when nonempty, load points instead of generating
  InitSpec init;
  TrainConfig train;
  Dyn1dConfig dyn;
  bool dyn_all_regimes = false;  // run all three regimes side by side
  std::string out_dir = "run";
};

// Parses the INI text; `origin` names the source in error messages.
ExperimentConfig parse_config_text(std::string_view text,
                                   const std::string& origin = "config");
ExperimentConfig load_config(const std::string& path);

// Serializes every field; parse_config_text(to_ini(c)) reproduces c exactly.
std::string to_ini(const ExperimentConfig& cfg);

// Structural checks that need no data: model name and dimension, positive
// sizes, the train/dynamics knobs in range. Throws ConfigError.
void validate_experiment(const ExperimentConfig& cfg);

// Built-in experiment definitions:
//   gmm50-full     full-size two-mode teacher-student run (d=50)
//   gmm-scaled     d=10 version that finishes in minutes
//   appendixC-fig8 the 200-walker 1-d learning dynamics, all three regimes
ExperimentConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace smcebm
