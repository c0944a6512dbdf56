// Copyright 2026 The smcebm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smcebm/energy.hpp"

namespace smcebm {

// Dense trapezoidal oracles over the model's support hint, for d <= 2 only
// (usage error above). spacing 0 picks the default: 0.005 in 1-D, 0.01 in
// 2-D. The tails beyond the hint are below 1e-30, so the trapezoid answer is
// accurate to roundoff on the analytic models.
double quadrature_log_partition(const EnergyModel& model,
                                std::span<const double> theta,
                                double spacing = 0.0);

using Observable = std::function<double(std::span<const double>)>;

// E_theta[obs], the observable integrated against e^{-U}/Z on the same grid.
double quadrature_expectation(const EnergyModel& model,
                              std::span<const double> theta,
                              const Observable& obs, double spacing = 0.0);

// How the walkers of the reduced 1-d learning system are initialized and
// whether they carry weights: model draws without weights ("unweighted"),
// data-initialized without weights ("pcd"), model draws with the weight
// correction ("jarzynski").
enum class Regime { unweighted, pcd, jarzynski };
Regime parse_regime(std::string_view name);
std::string_view regime_name(Regime r);

// State of the reduced ODE description: current log-odds z, the regime, the
// initial fraction q0_hat of walkers near mode b, and the log-odds z_star_hat
// implied by the data.
struct ReducedState {
  double z = 0.0;
  Regime regime = Regime::jarzynski;
  double q0_hat = 0.5;
  double z_star_hat = 0.0;
};

// Right-hand side of the regime ODE:
//   unweighted: q0_hat - q_star
//   pcd:        0
//   jarzynski:  sigmoid(log(q0/p0) - z) - q_star
// with q_star = sigmoid(-z_star_hat). Requires q0_hat in (0,1).
double reduced_drift(const ReducedState& s);

// Forward-Euler path of z, initial value included; t_final is rounded to a
// whole number of steps.
std::vector<double> reduced_ode_trajectory(ReducedState state, double step,
                                           double t_final);

// Stable point of the weighted regime: z_star_hat + log(q0_hat/(1-q0_hat)).
double reduced_fixed_point(const ReducedState& s);

// The same point found by bisecting the drift directly, independent of the
// closed form. Only the weighted regime has one.
double reduced_fixed_point_root(const ReducedState& s);

// Coupled 1-d learning system: n walkers (weighted per the regime) and n
// data points; the log-odds z(t) follows the empirical cross-entropy
// gradient while the walkers follow overdamped Langevin dynamics, both
// Euler-discretized with step dt. Requires mode separation |a-b| = 10; the
// mode-b window is [b-4, b+4] and a mode hop is a walker crossing the
// midpoint between the means.
struct Dyn1dConfig {
  Regime regime = Regime::jarzynski;
  double a = -5.0;
  double b = 5.0;
  double z0 = 0.0;
  double z_star = -std::log(3.0);  // data log-odds
  int n = 200;                     // walkers and data points
  double alpha = 1.0;              // walker mobility
  double dt = 0.01;
  double t_final = 300.0;
  int record_stride = 1;
  std::uint64_t seed = 1;
};

struct Dyn1dResult {
  std::vector<double> time;
  std::vector<double> z;
  std::vector<double> q;  // fraction of walkers inside the mode-b window
  double q0_hat = 0.0;
  double q_star_hat = 0.0;
  double z_star_hat = 0.0;
  double z_tilde = 0.0;  // predicted stable point (weighted regime, else NaN)
  int hop_count = 0;
  int hopped_walkers = 0;
  std::vector<std::uint8_t> walker_hopped;
  std::vector<double> final_positions;
  std::vector<double> final_log_weights;
  bool aborted = false;
  std::string abort_reason;
};

Dyn1dResult empirical_1d_dynamics(const Dyn1dConfig& cfg);

}  // namespace smcebm
