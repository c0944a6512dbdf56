// Copyright 2026 smc-ebm authors
// SPDX-License-Identifier: Apache-2.0

#include "smcebm/energy.hpp"

#include <cmath>
#include <stdexcept>

namespace smcebm {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Shared two-mode mixture kernel. Everything derives from the two exponents
//   e_a = |x-a|^2/2,  e_b = z + |x-b|^2/2,
// via U = -log(e^{-e_a} + e^{-e_b}) and the softmax responsibilities
//   r_a = sigmoid(e_b - e_a), r_b = 1 - r_a.
struct MixtureEval {
  double u;    // energy
  double r_b;  // responsibility of mode b
};

inline MixtureEval mixture_eval(std::span<const double> a,
                                std::span<const double> b, double z,
                                std::span<const double> x) {
  double ea = 0.0, eb = 0.0;
  const std::size_t d = x.size();
  for (std::size_t i = 0; i < d; ++i) {
    const double da = x[i] - a[i];
    const double db = x[i] - b[i];
    ea += da * da;
    eb += db * db;
  }
  ea *= 0.5;
  eb = 0.5 * eb + z;
  // U = min(ea,eb) - log1p(exp(-|ea-eb|)): max-shifted log-sum-exp.
  const double lo = ea < eb ? ea : eb;
  const double u = lo - std::log1p(std::exp(-std::fabs(ea - eb)));
  const double r_b = sigmoid(ea - eb);
  return {u, r_b};
}

}  // namespace

double softplus(double t) {
  if (t > 0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

std::vector<double> GmmParams::flat() const {
  std::vector<double> out;
  out.reserve(a.size() + b.size() + 1);
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  out.push_back(z);
  return out;
}

GmmParams GmmParams::from_flat(std::span<const double> theta, int d) {
  if (static_cast<int>(theta.size()) != 2 * d + 1)
    throw std::invalid_argument("flat parameter vector has wrong length");
  GmmParams p;
  p.a.assign(theta.begin(), theta.begin() + d);
  p.b.assign(theta.begin() + d, theta.begin() + 2 * d);
  p.z = theta[2 * d];
  return p;
}

void EnergyModel::check_dims(std::span<const double> theta,
                             std::span<const double> x) const {
  if (static_cast<int>(theta.size()) != param_count())
    throw std::invalid_argument(name() + ": parameter vector has size " +
                                std::to_string(theta.size()) + ", expected " +
                                std::to_string(param_count()));
  if (static_cast<int>(x.size()) != dimension())
    throw std::invalid_argument(name() + ": point has dimension " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(dimension()));
}

void EnergyModel::sample_exact(std::span<const double>, CounterRng&,
                               std::span<double>) const {
  throw std::logic_error(name() + ": no exact sampler");
}

std::optional<double> EnergyModel::mode_mass(
    std::span<const double> theta) const {
  const int zi = z_index();
  if (zi < 0) return std::nullopt;
  return sigmoid(theta[zi]);
}

std::vector<std::pair<double, double>> EnergyModel::support_hint(
    std::span<const double>) const {
  return std::vector<std::pair<double, double>>(
      dimension(), {-12.0, 12.0});
}

// ---------------------------------------------------------------------------
// GmmModel

double GmmModel::energy(std::span<const double> theta,
                        std::span<const double> x) const {
  check_dims(theta, x);
  return mixture_eval(theta.first(d_), theta.subspan(d_, d_), theta[2 * d_], x)
      .u;
}

void GmmModel::grad_x(std::span<const double> theta, std::span<const double> x,
                      std::span<double> out) const {
  check_dims(theta, x);
  const auto a = theta.first(d_);
  const auto b = theta.subspan(d_, d_);
  const auto m = mixture_eval(a, b, theta[2 * d_], x);
  const double r_a = 1.0 - m.r_b;
  for (int i = 0; i < d_; ++i)
    out[i] = r_a * (x[i] - a[i]) + m.r_b * (x[i] - b[i]);
}

void GmmModel::grad_theta(std::span<const double> theta,
                          std::span<const double> x,
                          std::span<double> out) const {
  energy_grad_theta(theta, x, out);
}

double GmmModel::energy_grad_x(std::span<const double> theta,
                               std::span<const double> x,
                               std::span<double> gx) const {
  check_dims(theta, x);
  const auto a = theta.first(d_);
  const auto b = theta.subspan(d_, d_);
  const auto m = mixture_eval(a, b, theta[2 * d_], x);
  const double r_a = 1.0 - m.r_b;
  for (int i = 0; i < d_; ++i)
    gx[i] = r_a * (x[i] - a[i]) + m.r_b * (x[i] - b[i]);
  return m.u;
}

double GmmModel::energy_grad_theta(std::span<const double> theta,
                                   std::span<const double> x,
                                   std::span<double> gtheta) const {
  check_dims(theta, x);
  const auto a = theta.first(d_);
  const auto b = theta.subspan(d_, d_);
  const auto m = mixture_eval(a, b, theta[2 * d_], x);
  const double r_a = 1.0 - m.r_b;
  for (int i = 0; i < d_; ++i) {
    gtheta[i] = -r_a * (x[i] - a[i]);
    gtheta[d_ + i] = -m.r_b * (x[i] - b[i]);
  }
  gtheta[2 * d_] = m.r_b;
  return m.u;
}

double GmmModel::energy_grad_all(std::span<const double> theta,
                                 std::span<const double> x,
                                 std::span<double> gx,
                                 std::span<double> gtheta) const {
  check_dims(theta, x);
  const auto a = theta.first(d_);
  const auto b = theta.subspan(d_, d_);
  const auto m = mixture_eval(a, b, theta[2 * d_], x);
  const double r_a = 1.0 - m.r_b;
  for (int i = 0; i < d_; ++i) {
    const double da = r_a * (x[i] - a[i]);
    const double db = m.r_b * (x[i] - b[i]);
    gx[i] = da + db;
    gtheta[i] = -da;
    gtheta[d_ + i] = -db;
  }
  gtheta[2 * d_] = m.r_b;
  return m.u;
}

std::optional<double> GmmModel::exact_log_partition(
    std::span<const double> theta) const {
  return 0.5 * d_ * kLog2Pi + softplus(-theta[2 * d_]);
}

void GmmModel::sample_exact(std::span<const double> theta, CounterRng& rng,
                            std::span<double> out) const {
  const auto a = theta.first(d_);
  const auto b = theta.subspan(d_, d_);
  const double p_a = sigmoid(theta[2 * d_]);
  // u is on (0,1], so P(u <= p_a) = p_a exactly.
  const bool mode_a = rng.uniform() <= p_a;
  const auto& mean = mode_a ? a : b;
  for (int i = 0; i < d_; ++i) out[i] = mean[i] + rng.normal();
}

std::optional<double> GmmModel::hessian_bound(
    std::span<const double> theta) const {
  double dist2 = 0.0;
  for (int i = 0; i < d_; ++i) {
    const double d = theta[i] - theta[d_ + i];
    dist2 += d * d;
  }
  return 1.0 + dist2 / 4.0;
}

std::vector<std::pair<double, double>> GmmModel::support_hint(
    std::span<const double> theta) const {
  std::vector<std::pair<double, double>> out(d_);
  for (int i = 0; i < d_; ++i) {
    const double lo = std::min(theta[i], theta[d_ + i]);
    const double hi = std::max(theta[i], theta[d_ + i]);
    out[i] = {lo - 12.0, hi + 12.0};
  }
  return out;
}

// ---------------------------------------------------------------------------
// GaussianModel

double GaussianModel::energy(std::span<const double> theta,
                             std::span<const double> x) const {
  check_dims(theta, x);
  double s = 0.0;
  for (int i = 0; i < d_; ++i) {
    const double d = x[i] - theta[i];
    s += d * d;
  }
  return 0.5 * s;
}

void GaussianModel::grad_x(std::span<const double> theta,
                           std::span<const double> x,
                           std::span<double> out) const {
  check_dims(theta, x);
  for (int i = 0; i < d_; ++i) out[i] = x[i] - theta[i];
}

void GaussianModel::grad_theta(std::span<const double> theta,
                               std::span<const double> x,
                               std::span<double> out) const {
  check_dims(theta, x);
  for (int i = 0; i < d_; ++i) out[i] = theta[i] - x[i];
}

std::optional<double> GaussianModel::exact_log_partition(
    std::span<const double>) const {
  return 0.5 * d_ * kLog2Pi;
}

void GaussianModel::sample_exact(std::span<const double> theta,
                                 CounterRng& rng, std::span<double> out) const {
  for (int i = 0; i < d_; ++i) out[i] = theta[i] + rng.normal();
}

std::vector<std::pair<double, double>> GaussianModel::support_hint(
    std::span<const double> theta) const {
  std::vector<std::pair<double, double>> out(d_);
  for (int i = 0; i < d_; ++i) out[i] = {theta[i] - 12.0, theta[i] + 12.0};
  return out;
}

// ---------------------------------------------------------------------------
// Gmm1dZModel

double Gmm1dZModel::energy(std::span<const double> theta,
                           std::span<const double> x) const {
  check_dims(theta, x);
  const double a[1] = {a_}, b[1] = {b_};
  return mixture_eval({a, 1}, {b, 1}, theta[0], x).u;
}

void Gmm1dZModel::grad_x(std::span<const double> theta,
                         std::span<const double> x,
                         std::span<double> out) const {
  check_dims(theta, x);
  const double a[1] = {a_}, b[1] = {b_};
  const auto m = mixture_eval({a, 1}, {b, 1}, theta[0], x);
  out[0] = (1.0 - m.r_b) * (x[0] - a_) + m.r_b * (x[0] - b_);
}

void Gmm1dZModel::grad_theta(std::span<const double> theta,
                             std::span<const double> x,
                             std::span<double> out) const {
  check_dims(theta, x);
  const double a[1] = {a_}, b[1] = {b_};
  out[0] = mixture_eval({a, 1}, {b, 1}, theta[0], x).r_b;
}

std::optional<double> Gmm1dZModel::exact_log_partition(
    std::span<const double> theta) const {
  return 0.5 * kLog2Pi + softplus(-theta[0]);
}

void Gmm1dZModel::sample_exact(std::span<const double> theta, CounterRng& rng,
                               std::span<double> out) const {
  const bool mode_a = rng.uniform() <= sigmoid(theta[0]);
  out[0] = (mode_a ? a_ : b_) + rng.normal();
}

std::vector<std::pair<double, double>> Gmm1dZModel::support_hint(
    std::span<const double>) const {
  return {{std::min(a_, b_) - 12.0, std::max(a_, b_) + 12.0}};
}

// ---------------------------------------------------------------------------

double gmm_energy(const GmmParams& p, std::span<const double> x) {
  GmmModel m(p.dim());
  return m.energy(p.flat(), x);
}

std::vector<double> gmm_grad_theta(const GmmParams& p,
                                   std::span<const double> x) {
  GmmModel m(p.dim());
  std::vector<double> out(m.param_count());
  m.grad_theta(p.flat(), x, out);
  return out;
}

double gmm_log_partition(const GmmParams& p) {
  return 0.5 * p.dim() * kLog2Pi + softplus(-p.z);
}

Dataset gmm_sample_target(const GmmParams& p, std::int64_t n,
                          std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("dataset size must be >= 1");
  const int d = p.dim();
  GmmModel model(d);
  const auto theta = p.flat();
  Dataset out;
  out.dim = d;
  out.flat.resize(static_cast<std::size_t>(n) * d);
  for (std::int64_t j = 0; j < n; ++j) {
    CounterRng rng(seed, Stream::data, static_cast<std::uint64_t>(j));
    model.sample_exact(theta, rng, {out.flat.data() + j * d,
                                    static_cast<std::size_t>(d)});
  }
  return out;
}

std::unique_ptr<EnergyModel> make_model(const std::string& name, int dim,
                                        double fixed_a, double fixed_b) {
  if (name == "gmm") return std::make_unique<GmmModel>(dim);
  if (name == "gaussian") return std::make_unique<GaussianModel>(dim);
  if (name == "gmm1d-z") {
    if (dim != 1)
      throw std::invalid_argument("gmm1d-z is one-dimensional");
    return std::make_unique<Gmm1dZModel>(fixed_a, fixed_b);
  }
  throw std::invalid_argument("unknown model: " + name);
}

}  // namespace smcebm
