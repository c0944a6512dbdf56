// Copyright 2026 The smcebm Authors
// SPDX-License-Identifier: Apache-2.0

#include "smcebm/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace smcebm {

double alpha(const EnergyModel& model, std::span<const double> theta,
             std::span<const double> x, std::span<const double> y, double h) {
  std::vector<double> gx(static_cast<std::size_t>(model.dimension()));
  const double u = model.energy_grad_x(theta, x, gx);
  return alpha_from_parts(u, gx, x, y, h);
}

Point ula_step(const EnergyModel& model, std::span<const double> theta,
               std::span<const double> x, const StepParams& step,
               CounterRng& rng, long walker) {
  if (!(step.h > 0.0))
    throw std::invalid_argument("ula_step: step size must be positive");
  const int d = model.dimension();
  if (!step.noise.empty() && step.noise.size() != static_cast<std::size_t>(d))
    throw std::invalid_argument("ula_step: supplied noise has length " +
                                std::to_string(step.noise.size()) +
                                ", expected " + std::to_string(d));

  std::vector<double> gx(static_cast<std::size_t>(d));
  model.energy_grad_x(theta, x, gx);

  const double scale = std::sqrt(2.0 * step.h);
  Point out(static_cast<std::size_t>(d));
  bool finite = true;
  for (int i = 0; i < d; ++i) {
    const double xi = step.noise.empty() ? rng.normal() : step.noise[i];
    out[i] = x[i] - step.h * gx[i] + scale * xi;
    finite = finite && std::isfinite(out[i]);
  }
  if (!finite) {
    std::string what = "ula_step: non-finite position";
    if (walker >= 0) what += " for walker " + std::to_string(walker);
    throw BlowupError(std::move(what), walker);
  }
  return out;
}

double weight_increment(const EnergyModel& model,
                        std::span<const double> theta_prev,
                        std::span<const double> theta_next,
                        std::span<const double> x_prev,
                        std::span<const double> x_next, double h) {
  return -alpha(model, theta_next, x_next, x_prev, h) +
         alpha(model, theta_prev, x_prev, x_next, h);
}

double frozen_weight_increment(const EnergyModel& model,
                               std::span<const double> theta_prev,
                               std::span<const double> theta_next,
                               std::span<const double> x) {
  return model.energy(theta_prev, x) - model.energy(theta_next, x);
}

double log_transition_density(const EnergyModel& model,
                              std::span<const double> theta,
                              std::span<const double> x,
                              std::span<const double> y, double h) {
  if (!(h > 0.0))
    throw std::invalid_argument(
        "log_transition_density: step size must be positive");
  const int d = model.dimension();
  std::vector<double> gx(static_cast<std::size_t>(d));
  model.energy_grad_x(theta, x, gx);
  double q = 0.0;
  for (int i = 0; i < d; ++i) {
    const double r = y[i] - x[i] + h * gx[i];
    q += r * r;
  }
  return -0.5 * d * std::log(4.0 * std::numbers::pi * h) - q / (4.0 * h);
}

}  // namespace smcebm
