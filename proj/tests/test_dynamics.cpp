// Copyright 2026 smc-ebm authors
// SPDX-License-Identifier: Apache-2.0
//
// Langevin stepping and weight bookkeeping: hand-computed values, the
// stationary-variance bias of the unadjusted scheme, the static-parameter
// weight identity, and the transition-density telescoping.
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "smcebm/dynamics.hpp"
#include "smcebm/energy.hpp"
#include "smcebm/population.hpp"
#include "smcebm/rng.hpp"

using namespace smcebm;

TEST_CASE("alpha hand values") {
  GaussianModel g(1);
  std::vector<double> th{0.0};
  // at the minimum both the gradient terms vanish
  CHECK(alpha(g, th, std::vector<double>{0.0}, std::vector<double>{3.0},
              0.1) == doctest::Approx(0.0));
  // U(1)=1/2, grad=1: 1/2 + (2-1)/2 + 0.1/4 = 1.025
  CHECK(alpha(g, th, std::vector<double>{1.0}, std::vector<double>{2.0},
              0.1) == doctest::Approx(1.025));

  // alpha_from_parts is the same quantity computed from cached pieces
  std::vector<double> gx(1);
  const double e = g.energy_grad_x(th, std::vector<double>{1.0}, gx);
  CHECK(alpha_from_parts(e, gx, std::vector<double>{1.0},
                         std::vector<double>{2.0}, 0.1) ==
        doctest::Approx(1.025));
}

TEST_CASE("ULA hand step and input validation") {
  GaussianModel g(1);
  std::vector<double> th{0.0};
  std::vector<double> noise{1.0};
  CounterRng rng(1, Stream::generic);
  StepParams sp;
  sp.h = 0.1;
  sp.noise = noise;
  const Point y = ula_step(g, th, std::vector<double>{2.0}, sp, rng);
  CHECK(y[0] == doctest::Approx(1.8 + std::sqrt(0.2)));

  StepParams bad_h;
  bad_h.h = 0.0;
  CHECK_THROWS_AS(
      (void)ula_step(g, th, std::vector<double>{2.0}, bad_h, rng),
      std::invalid_argument);

  GaussianModel g2(2);
  std::vector<double> th2{0.0, 0.0};
  StepParams short_noise;
  short_noise.noise = noise;  // length 1, model wants 2
  CHECK_THROWS_AS((void)ula_step(g2, th2, std::vector<double>{0.0, 1.0},
                                 short_noise, rng),
                  std::invalid_argument);
}

TEST_CASE("ULA blowup raises a labeled error") {
  GaussianModel g(1);
  std::vector<double> th{0.0};
  StepParams sp;
  sp.h = 1e10;  // drives |x - h x| past the double range
  CounterRng rng(1, Stream::generic);
  try {
    (void)ula_step(g, th, std::vector<double>{1e300}, sp, rng, 7);
    FAIL("expected BlowupError");
  } catch (const BlowupError& e) {
    CHECK(e.walker() == 7);
  }
}

TEST_CASE("ULA stationary variance carries the step-size bias") {
  // For U = x^2/2 the chain x' = (1-h)x + sqrt(2h) xi has stationary
  // variance 2h/(1-(1-h)^2) = 1/(1-h/2), not 1.
  GaussianModel g(1);
  std::vector<double> th{0.0};
  const double h = 0.1;
  const int n_walk = 4000;
  StepParams sp;
  sp.h = h;
  double sum = 0.0, sumsq = 0.0;
  long count = 0;
  for (int w = 0; w < n_walk; ++w) {
    CounterRng rng(3, Stream::walker_noise, static_cast<std::uint64_t>(w));
    Point x{0.0};
    for (int k = 0; k < 500; ++k) {
      x = ula_step(g, th, x, sp, rng);
      if (k >= 250 && k % 25 == 0) {
        sum += x[0];
        sumsq += x[0] * x[0];
        ++count;
      }
    }
  }
  const double mean = sum / double(count);
  const double var = sumsq / double(count) - mean * mean;
  CHECK(var == doctest::Approx(1.0 / (1.0 - h / 2.0)).epsilon(0.02));
}

TEST_CASE("weight increments are what their definitions say") {
  GmmModel m(2);
  std::vector<double> tp{-1.0, 0.3, 1.2, -0.4, 0.2};
  std::vector<double> tn{-1.1, 0.35, 1.15, -0.38, 0.25};
  std::vector<double> xp{0.4, -0.6};
  std::vector<double> xn{0.5, -0.55};
  const double h = 0.07;
  CHECK(weight_increment(m, tp, tn, xp, xn, h) ==
        doctest::Approx(-alpha(m, tn, xn, xp, h) + alpha(m, tp, xp, xn, h))
            .epsilon(1e-14));
  CHECK(frozen_weight_increment(m, tp, tn, xp) ==
        doctest::Approx(m.energy(tp, xp) - m.energy(tn, xp)).epsilon(1e-14));
  // no parameter motion, no walker motion: zero work
  CHECK(weight_increment(m, tp, tp, xp, xp, h) == doctest::Approx(0.0));
  CHECK(frozen_weight_increment(m, tp, tp, xp) == 0.0);
}

TEST_CASE("static parameters keep mean exp(A) at one") {
  // Frozen theta: the weights satisfy E[e^A] = 1 at every step, whatever the
  // step size bias does to the positions.
  GmmModel m(1);
  std::vector<double> th{-2.0, 2.0, 0.3};
  const int n_walk = 4000;
  const int iters = 300;
  const double h = 0.05;
  Population pop = init_population(m, th, n_walk, 11);
  StepParams sp;
  sp.h = h;
  for (int k = 1; k <= iters; ++k) {
    for (int i = 0; i < n_walk; ++i) {
      CounterRng rng(11, Stream::walker_noise, static_cast<std::uint64_t>(i),
                     static_cast<std::uint64_t>(k));
      const Point xn = ula_step(m, th, pop.x(i), sp, rng);
      pop.log_weights[static_cast<std::size_t>(i)] +=
          weight_increment(m, th, th, pop.x(i), xn, h);
      std::copy(xn.begin(), xn.end(), pop.x(i).begin());
    }
  }
  double mean = 0.0, meansq = 0.0;
  for (double a : pop.log_weights) {
    mean += std::exp(a);
    meansq += std::exp(2.0 * a);
  }
  mean /= n_walk;
  meansq /= n_walk;
  const double se = std::sqrt((meansq - mean * mean) / n_walk);
  CHECK(std::abs(mean - 1.0) < 3.0 * se);
}

TEST_CASE("transition density closed form and normalization") {
  GaussianModel g(1);
  std::vector<double> th{0.0};
  const double h = 0.1;
  // x=1: mean of the move is 0.9, so log beta(1,1) has residue 0.1
  CHECK(log_transition_density(g, th, std::vector<double>{1.0},
                               std::vector<double>{1.0}, h) ==
        doctest::Approx(-0.5 * std::log(4.0 * M_PI * h) -
                        0.01 / (4.0 * h)));

  GmmModel m(1);
  std::vector<double> mt{-1.0, 1.5, 0.2};
  const std::vector<double> x{0.7};
  std::vector<double> gx(1);
  m.grad_x(mt, x, gx);
  const double mu = x[0] - h * gx[0];
  // trapezoid over +-10 standard deviations of the Gaussian kernel
  const double sd = std::sqrt(2.0 * h);
  const int cells = 20000;
  const double lo = mu - 10.0 * sd, hi = mu + 10.0 * sd;
  const double dy = (hi - lo) / cells;
  double mass = 0.0;
  for (int i = 0; i <= cells; ++i) {
    const double y = lo + i * dy;
    const double w = (i == 0 || i == cells) ? 0.5 : 1.0;
    mass += w * std::exp(log_transition_density(
                    m, mt, x, std::vector<double>{y}, h));
  }
  mass *= dy;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));

  CHECK_THROWS_AS((void)log_transition_density(
                      g, th, std::vector<double>{0.0},
                      std::vector<double>{0.0}, 0.0),
                  std::invalid_argument);
}

TEST_CASE("weights telescope into the transition-density product") {
  // Along any trajectory with moving parameters,
  //   A_K = U_0(X_0) - U_K(X_K)
  //       + sum_q [log beta_q(X_q, X_{q-1}) - log beta_{q-1}(X_{q-1}, X_q)].
  GmmModel m(2);
  const double h = 0.08;
  std::mt19937 gen(19);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int traj = 0; traj < 10; ++traj) {
    std::vector<double> theta{-1.0 + 0.1 * nd(gen), 0.2 * nd(gen),
                              1.0 + 0.1 * nd(gen), 0.2 * nd(gen),
                              0.3 * nd(gen)};
    Point x{nd(gen), nd(gen)};
    const std::vector<double> theta0 = theta;
    const Point x0 = x;
    double a = 0.0;
    double beta_sum = 0.0;
    StepParams sp;
    sp.h = h;
    for (int q = 1; q <= 20; ++q) {
      CounterRng rng(23, Stream::walker_noise,
                     static_cast<std::uint64_t>(traj),
                     static_cast<std::uint64_t>(q));
      std::vector<double> theta_next = theta;
      for (auto& t : theta_next) t += 0.01 * nd(gen);
      const Point xn = ula_step(m, theta, x, sp, rng);
      a += weight_increment(m, theta, theta_next, x, xn, h);
      beta_sum += log_transition_density(m, theta_next, xn, x, h) -
                  log_transition_density(m, theta, x, xn, h);
      x = xn;
      theta = theta_next;
    }
    const double rhs =
        m.energy(theta0, x0) - m.energy(theta, x) + beta_sum;
    CHECK(std::abs(a - rhs) <= 1e-8 * std::max(1.0, std::abs(rhs)));
  }
}
