// Copyright 2026 The smcebm Authors
// SPDX-License-Identifier: Apache-2.0

#include "smcebm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "smcebm/rng.hpp"

namespace smcebm {

namespace {

struct Axis {
  double lo = 0.0;
  double step = 0.0;
  std::int64_t points = 0;  // grid nodes, ends included
};

Axis make_axis(double lo, double hi, double spacing) {
  if (!(hi > lo)) throw std::invalid_argument("quadrature: empty support interval");
  Axis ax;
  const auto cells = static_cast<std::int64_t>(std::ceil((hi - lo) / spacing));
  ax.points = std::max<std::int64_t>(cells, 1) + 1;
  ax.lo = lo;
  ax.step = (hi - lo) / static_cast<double>(ax.points - 1);
  return ax;
}

// Streaming log-sum with a running shift so tiny densities never underflow
// the pair of accumulators (mass and obs-weighted mass).
struct ShiftedSums {
  double shift = -std::numeric_limits<double>::infinity();
  double mass = 0.0;
  double weighted = 0.0;

  void add(double log_w, double obs_value) {
    if (log_w > shift) {
      const double scale = std::isinf(shift) ? 0.0 : std::exp(shift - log_w);
      mass *= scale;
      weighted *= scale;
      shift = log_w;
    }
    const double w = std::exp(log_w - shift);
    mass += w;
    weighted += w * obs_value;
  }
};

struct QuadOut {
  double log_z = 0.0;
  double expectation = 0.0;
};

QuadOut quadrature_core(const EnergyModel& model, std::span<const double> theta,
                        const Observable* obs, double spacing) {
  const int d = model.dimension();
  if (d < 1 || d > 2)
    throw std::invalid_argument("quadrature oracles handle d <= 2 only");
  if (spacing < 0.0) throw std::invalid_argument("quadrature: spacing must be positive");
  if (spacing == 0.0) spacing = (d == 1) ? 0.005 : 0.01;

  const auto hint = model.support_hint(theta);
  ShiftedSums sums;
  double log_cell = 0.0;

  if (d == 1) {
    const Axis ax = make_axis(hint[0].first, hint[0].second, spacing);
    log_cell = std::log(ax.step);
    double x[1];
    for (std::int64_t i = 0; i < ax.points; ++i) {
      x[0] = ax.lo + static_cast<double>(i) * ax.step;
      const double w = (i == 0 || i == ax.points - 1) ? 0.5 : 1.0;
      const double log_w = std::log(w) - model.energy(theta, {x, 1});
      sums.add(log_w, obs ? (*obs)({x, 1}) : 0.0);
    }
  } else {
    const Axis ax = make_axis(hint[0].first, hint[0].second, spacing);
    const Axis ay = make_axis(hint[1].first, hint[1].second, spacing);
    log_cell = std::log(ax.step) + std::log(ay.step);
    double x[2];
    for (std::int64_t i = 0; i < ax.points; ++i) {
      x[0] = ax.lo + static_cast<double>(i) * ax.step;
      const double wi = (i == 0 || i == ax.points - 1) ? 0.5 : 1.0;
      for (std::int64_t j = 0; j < ay.points; ++j) {
        x[1] = ay.lo + static_cast<double>(j) * ay.step;
        const double wj = (j == 0 || j == ay.points - 1) ? 0.5 : 1.0;
        const double log_w = std::log(wi * wj) - model.energy(theta, {x, 2});
        sums.add(log_w, obs ? (*obs)({x, 2}) : 0.0);
      }
    }
  }

  QuadOut out;
  out.log_z = sums.shift + std::log(sums.mass) + log_cell;
  out.expectation = obs ? sums.weighted / sums.mass : 0.0;
  return out;
}

double q_of_z(double z) { return sigmoid(-z); }

}  // namespace

double quadrature_log_partition(const EnergyModel& model,
                                std::span<const double> theta,
                                double spacing) {
  return quadrature_core(model, theta, nullptr, spacing).log_z;
}

double quadrature_expectation(const EnergyModel& model,
                              std::span<const double> theta,
                              const Observable& obs, double spacing) {
  if (!obs) throw std::invalid_argument("quadrature_expectation: empty observable");
  return quadrature_core(model, theta, &obs, spacing).expectation;
}

Regime parse_regime(std::string_view name) {
  if (name == "unweighted") return Regime::unweighted;
  if (name == "pcd") return Regime::pcd;
  if (name == "jarzynski") return Regime::jarzynski;
  throw std::invalid_argument("unknown regime: " + std::string(name));
}

std::string_view regime_name(Regime r) {
  switch (r) {
    case Regime::unweighted: return "unweighted";
    case Regime::pcd: return "pcd";
    case Regime::jarzynski: return "jarzynski";
  }
  throw std::invalid_argument("bad regime value");
}

double reduced_drift(const ReducedState& s) {
  if (!(s.q0_hat > 0.0 && s.q0_hat < 1.0))
    throw std::invalid_argument("reduced_drift: q0_hat must lie in (0,1)");
  const double q_star = q_of_z(s.z_star_hat);
  switch (s.regime) {
    case Regime::unweighted:
      return s.q0_hat - q_star;
    case Regime::pcd:
      return 0.0;
    case Regime::jarzynski:
      // q0 e^{-z} / (p0 + q0 e^{-z}) written in sigmoid form for stability.
      return sigmoid(std::log(s.q0_hat / (1.0 - s.q0_hat)) - s.z) - q_star;
  }
  throw std::invalid_argument("bad regime value");
}

std::vector<double> reduced_ode_trajectory(ReducedState state, double step,
                                           double t_final) {
  if (!(step > 0.0)) throw std::invalid_argument("reduced_ode_trajectory: step must be positive");
  if (!(t_final >= 0.0)) throw std::invalid_argument("reduced_ode_trajectory: t_final must be nonnegative");
  const auto steps = static_cast<std::int64_t>(std::llround(t_final / step));
  std::vector<double> path;
  path.reserve(static_cast<std::size_t>(steps) + 1);
  path.push_back(state.z);
  for (std::int64_t k = 0; k < steps; ++k) {
    state.z += step * reduced_drift(state);
    path.push_back(state.z);
  }
  return path;
}

double reduced_fixed_point(const ReducedState& s) {
  if (s.regime != Regime::jarzynski)
    throw std::invalid_argument("reduced_fixed_point: only the weighted regime has one");
  if (!(s.q0_hat > 0.0 && s.q0_hat < 1.0))
    throw std::invalid_argument("reduced_fixed_point: q0_hat must lie in (0,1)");
  return s.z_star_hat + std::log(s.q0_hat / (1.0 - s.q0_hat));
}

double reduced_fixed_point_root(const ReducedState& s) {
  if (s.regime != Regime::jarzynski)
    throw std::invalid_argument("reduced_fixed_point_root: only the weighted regime has one");
  ReducedState probe = s;
  // The drift is strictly decreasing in z with limits 1-q_star > 0 and
  // -q_star < 0, so a sign change is guaranteed on a wide bracket.
  double lo = -700.0, hi = 700.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    probe.z = mid;
    if (reduced_drift(probe) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Dyn1dResult empirical_1d_dynamics(const Dyn1dConfig& cfg) {
  if (std::abs(std::abs(cfg.a - cfg.b) - 10.0) > 1e-9)
    throw std::invalid_argument("empirical_1d_dynamics: mode separation |a-b| must be 10");
  if (cfg.n < 2) throw std::invalid_argument("empirical_1d_dynamics: need at least 2 walkers");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("empirical_1d_dynamics: dt must be positive");
  if (!(cfg.t_final >= 0.0)) throw std::invalid_argument("empirical_1d_dynamics: t_final must be nonnegative");
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("empirical_1d_dynamics: alpha must be positive");
  if (cfg.record_stride < 1) throw std::invalid_argument("empirical_1d_dynamics: record_stride must be >= 1");

  const Gmm1dZModel model(cfg.a, cfg.b);
  GmmParams target;
  target.a = {cfg.a};
  target.b = {cfg.b};
  target.z = cfg.z_star;
  const Dataset data = gmm_sample_target(target, cfg.n, cfg.seed);

  const double mid = 0.5 * (cfg.a + cfg.b);
  const double b_lo = cfg.b - 4.0, b_hi = cfg.b + 4.0;
  const auto in_b = [&](double x) { return x >= b_lo && x <= b_hi; };
  const int n = cfg.n;
  const double n_inv = 1.0 / static_cast<double>(n);
  const bool weighted = cfg.regime == Regime::jarzynski;

  Dyn1dResult res;
  std::vector<double> xs(static_cast<std::size_t>(n));
  std::vector<double> aw(static_cast<std::size_t>(n), 0.0);
  res.walker_hopped.assign(static_cast<std::size_t>(n), 0);

  if (cfg.regime == Regime::pcd) {
    for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = data.flat[static_cast<std::size_t>(i)];
  } else {
    const double z0v[1] = {cfg.z0};
    for (int i = 0; i < n; ++i) {
      CounterRng rng(cfg.seed, Stream::walker_init, static_cast<std::uint64_t>(i));
      model.sample_exact({z0v, 1}, rng, {&xs[static_cast<std::size_t>(i)], 1});
    }
  }

  int count_star = 0;
  for (int j = 0; j < n; ++j) count_star += in_b(data.flat[static_cast<std::size_t>(j)]) ? 1 : 0;
  res.q_star_hat = count_star * n_inv;
  int count_0 = 0;
  for (int i = 0; i < n; ++i) count_0 += in_b(xs[static_cast<std::size_t>(i)]) ? 1 : 0;
  res.q0_hat = count_0 * n_inv;
  const bool fractions_ok =
      res.q_star_hat > 0.0 && res.q_star_hat < 1.0 && res.q0_hat > 0.0 && res.q0_hat < 1.0;
  res.z_star_hat = fractions_ok
                       ? std::log((1.0 - res.q_star_hat) / res.q_star_hat)
                       : std::numeric_limits<double>::quiet_NaN();
  res.z_tilde = (weighted && fractions_ok)
                    ? res.z_star_hat + std::log(res.q0_hat / (1.0 - res.q0_hat))
                    : std::numeric_limits<double>::quiet_NaN();

  std::vector<std::uint8_t> side(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) side[static_cast<std::size_t>(i)] = xs[static_cast<std::size_t>(i)] > mid ? 1 : 0;

  const auto record = [&](double t, double z_now) {
    int cb = 0;
    for (int i = 0; i < n; ++i) cb += in_b(xs[static_cast<std::size_t>(i)]) ? 1 : 0;
    res.time.push_back(t);
    res.z.push_back(z_now);
    res.q.push_back(cb * n_inv);
  };

  double z = cfg.z0;
  record(0.0, z);

  const auto steps = static_cast<std::int64_t>(std::llround(cfg.t_final / cfg.dt));
  const double noise_scale = std::sqrt(2.0 * cfg.alpha * cfg.dt);
  const auto fail = [&](std::string why) {
    res.aborted = true;
    res.abort_reason = std::move(why);
  };

  for (std::int64_t s = 1; s <= steps && !res.aborted; ++s) {
    const double th_old[1] = {z};
    double g[1];

    // Parameter drift: weighted walker mean of the z-derivative of the
    // energy minus the data mean, everything under the current z.
    double shift = -std::numeric_limits<double>::infinity();
    if (weighted)
      for (int i = 0; i < n; ++i) shift = std::max(shift, aw[static_cast<std::size_t>(i)]);
    else
      shift = 0.0;
    double wsum = 0.0, gsum = 0.0;
    for (int i = 0; i < n; ++i) {
      model.grad_theta({th_old, 1}, {&xs[static_cast<std::size_t>(i)], 1}, {g, 1});
      const double w = weighted ? std::exp(aw[static_cast<std::size_t>(i)] - shift) : 1.0;
      wsum += w;
      gsum += w * g[0];
    }
    double dsum = 0.0;
    for (int j = 0; j < n; ++j) {
      model.grad_theta({th_old, 1}, data.point(j), {g, 1});
      dsum += g[0];
    }
    const double z_dot = gsum / wsum - dsum * n_inv;
    const double z_new = z + cfg.dt * z_dot;
    if (!std::isfinite(z_new)) {
      fail("non-finite parameter at step " + std::to_string(s));
      break;
    }
    const double th_new[1] = {z_new};

    // Weight correction for the parameter move, then the walker move under
    // the updated parameter.
    for (int i = 0; i < n; ++i) {
      auto& x = xs[static_cast<std::size_t>(i)];
      if (weighted)
        aw[static_cast<std::size_t>(i)] -=
            model.energy({th_new, 1}, {&x, 1}) - model.energy({th_old, 1}, {&x, 1});
      CounterRng rng(cfg.seed, Stream::dyn1d, static_cast<std::uint64_t>(i),
                     static_cast<std::uint64_t>(s));
      model.grad_x({th_new, 1}, {&x, 1}, {g, 1});
      x += -cfg.alpha * g[0] * cfg.dt + noise_scale * rng.normal();
      if (!std::isfinite(x)) {
        fail("non-finite walker state (walker " + std::to_string(i) + ", step " +
             std::to_string(s) + ")");
        break;
      }
      const std::uint8_t sd = x > mid ? 1 : 0;
      if (sd != side[static_cast<std::size_t>(i)]) {
        side[static_cast<std::size_t>(i)] = sd;
        ++res.hop_count;
        if (!res.walker_hopped[static_cast<std::size_t>(i)]) {
          res.walker_hopped[static_cast<std::size_t>(i)] = 1;
          ++res.hopped_walkers;
        }
      }
    }
    if (res.aborted) break;
    z = z_new;
    if (s % cfg.record_stride == 0 || s == steps)
      record(static_cast<double>(s) * cfg.dt, z);
  }

  res.final_positions = std::move(xs);
  res.final_log_weights = std::move(aw);
  return res;
}

}  // namespace smcebm
