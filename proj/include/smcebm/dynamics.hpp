// Copyright 2026 The smcebm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <stdexcept>
#include <string>

#include "smcebm/energy.hpp"
#include "smcebm/rng.hpp"

namespace smcebm {

// Raised when a walker position (or derived quantity) stops being finite,
// typically because the step size or a learning rate is too aggressive.
class BlowupError : public std::runtime_error {
 public:
  BlowupError(std::string what, long walker)
      : std::runtime_error(std::move(what)), walker_(walker) {}

  // Index of the offending walker, or -1 when not attributable to one.
  long walker() const { return walker_; }

 private:
  long walker_;
};

// Parameters of a single unadjusted Langevin (ULA) move.
//
// `noise` is a deterministic test hook: when non-empty it must hold d
// standard-normal values and is used verbatim instead of drawing from the
// generator. The admissibility condition h < 2/L (L the model's Hessian
// bound) is advisory and checked by callers that know L, not here.
struct StepParams {
  double h = 0.1;
  std::span<const double> noise{};
};

// Bookkeeping term alpha(x, y) = U(x) + (y-x).grad U(x)/2 + h|grad U(x)|^2/4
// evaluated from already computed energy/gradient values at x. Shared by the
// public alpha() and by the training loop, which caches (U, grad U) pairs.
inline double alpha_from_parts(double energy_x, std::span<const double> grad_x,
                               std::span<const double> x,
                               std::span<const double> y, double h) {
  double dot = 0.0;
  double g2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += (y[i] - x[i]) * grad_x[i];
    g2 += grad_x[i] * grad_x[i];
  }
  return energy_x + 0.5 * dot + 0.25 * h * g2;
}

// The weight bookkeeping function alpha(x, y) under parameters theta.
double alpha(const EnergyModel& model, std::span<const double> theta,
             std::span<const double> x, std::span<const double> y, double h);

// One ULA move: x - h grad U(x) + sqrt(2h) xi. Draws xi from `rng` unless
// step.noise is supplied. Throws BlowupError (naming `walker`) if any output
// coordinate is non-finite.
Point ula_step(const EnergyModel& model, std::span<const double> theta,
               std::span<const double> x, const StepParams& step,
               CounterRng& rng, long walker = -1);

// Weight increment for a walker moved from x_prev to x_next by a ULA step
// taken under theta_prev, while the parameters moved to theta_next:
//   -alpha_{theta_next}(x_next, x_prev) + alpha_{theta_prev}(x_prev, x_next).
// Note the argument swap in the first term; that ordering is what makes the
// weights track the evolving partition function.
double weight_increment(const EnergyModel& model,
                        std::span<const double> theta_prev,
                        std::span<const double> theta_next,
                        std::span<const double> x_prev,
                        std::span<const double> x_next, double h);

// Weight increment for a walker that did NOT move this iteration:
// U_{theta_prev}(x) - U_{theta_next}(x).
double frozen_weight_increment(const EnergyModel& model,
                               std::span<const double> theta_prev,
                               std::span<const double> theta_next,
                               std::span<const double> x);

// Log density of the ULA transition kernel,
//   log beta(x, y) = -(d/2) log(4 pi h) - |y - x + h grad U(x)|^2 / (4h).
// Used by the telescoping-identity checks. h <= 0 is a usage error.
double log_transition_density(const EnergyModel& model,
                              std::span<const double> theta,
                              std::span<const double> x,
                              std::span<const double> y, double h);

}  // namespace smcebm
