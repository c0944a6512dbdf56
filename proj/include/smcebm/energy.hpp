// Copyright 2026 smc-ebm authors
// SPDX-License-Identifier: Apache-2.0
//
// Energy models: the interface plus the analytic models used throughout.
// Parameter vectors are flat with a fixed documented layout so per-block
// learning rates and generic optimizers can address them:
//   two-mode mixture: [a_1..a_d, b_1..b_d, z]
//   isotropic Gaussian: [mu_1..mu_d]
//   1-d z-only mixture: [z] (means fixed at construction)
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smcebm/rng.hpp"

namespace smcebm {

using Point = std::vector<double>;

struct Dataset {
  int dim = 0;
  std::vector<double> flat;  // size() * dim, row-major

  std::int64_t size() const {
    return dim == 0 ? 0 : static_cast<std::int64_t>(flat.size()) / dim;
  }
  std::span<const double> point(std::int64_t j) const {
    return {flat.data() + j * dim, static_cast<std::size_t>(dim)};
  }
};

// Two-mode mixture parameters: mode means a, b and log-odds z. The mass of
// mode a is p = 1/(1+e^{-z}).
struct GmmParams {
  std::vector<double> a;
  std::vector<double> b;
  double z = 0.0;

  int dim() const { return static_cast<int>(a.size()); }
  std::vector<double> flat() const;
  static GmmParams from_flat(std::span<const double> theta, int d);
};

// Energies must be twice differentiable with bounded Hessian and confining at
// infinity so the partition function exists; both analytic models here grow
// quadratically. All evaluation methods are pure and reentrant.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;

  virtual int dimension() const = 0;
  virtual int param_count() const = 0;
  virtual std::string name() const = 0;

  virtual double energy(std::span<const double> theta,
                        std::span<const double> x) const = 0;
  virtual void grad_x(std::span<const double> theta, std::span<const double> x,
                      std::span<double> out) const = 0;
  virtual void grad_theta(std::span<const double> theta,
                          std::span<const double> x,
                          std::span<double> out) const = 0;

  // Fused evaluations for hot loops; defaults fall back to separate calls.
  virtual double energy_grad_x(std::span<const double> theta,
                               std::span<const double> x,
                               std::span<double> gx) const {
    grad_x(theta, x, gx);
    return energy(theta, x);
  }
  virtual double energy_grad_theta(std::span<const double> theta,
                                   std::span<const double> x,
                                   std::span<double> gtheta) const {
    grad_theta(theta, x, gtheta);
    return energy(theta, x);
  }
  virtual double energy_grad_all(std::span<const double> theta,
                                 std::span<const double> x,
                                 std::span<double> gx,
                                 std::span<double> gtheta) const {
    grad_x(theta, x, gx);
    return energy_grad_theta(theta, x, gtheta);
  }

  virtual std::optional<double> exact_log_partition(
      std::span<const double> /*theta*/) const {
    return std::nullopt;
  }

  // Exact draw from rho_theta when available (all analytic models here).
  virtual bool has_exact_sampler() const { return false; }
  virtual void sample_exact(std::span<const double> theta, CounterRng& rng,
                            std::span<double> out) const;

  // Safe overestimate of the Hessian operator norm, used for the step-size
  // admissibility warning.
  virtual std::optional<double> hessian_bound(
      std::span<const double> /*theta*/) const {
    return std::nullopt;
  }

  // Index of the log-odds parameter in the flat layout, -1 if none.
  virtual int z_index() const { return -1; }

  // Mass of mode a, p = 1/(1+e^{-z}), for models with a z parameter.
  std::optional<double> mode_mass(std::span<const double> theta) const;

  // Per-axis interval containing all but ~1e-30 of the mass, for quadrature.
  virtual std::vector<std::pair<double, double>> support_hint(
      std::span<const double> theta) const;

  void check_dims(std::span<const double> theta,
                  std::span<const double> x) const;
};

// U_theta(x) = -log(exp(-|x-a|^2/2) + exp(-z - |x-b|^2/2)), exact partition
// function (2*pi)^{d/2} (1 + e^{-z}).
class GmmModel final : public EnergyModel {
 public:
  explicit GmmModel(int d) : d_(d) {}

  int dimension() const override { return d_; }
  int param_count() const override { return 2 * d_ + 1; }
  std::string name() const override { return "gmm"; }

  double energy(std::span<const double> theta,
                std::span<const double> x) const override;
  void grad_x(std::span<const double> theta, std::span<const double> x,
              std::span<double> out) const override;
  void grad_theta(std::span<const double> theta, std::span<const double> x,
                  std::span<double> out) const override;
  double energy_grad_x(std::span<const double> theta,
                       std::span<const double> x,
                       std::span<double> gx) const override;
  double energy_grad_theta(std::span<const double> theta,
                           std::span<const double> x,
                           std::span<double> gtheta) const override;
  double energy_grad_all(std::span<const double> theta,
                         std::span<const double> x, std::span<double> gx,
                         std::span<double> gtheta) const override;

  std::optional<double> exact_log_partition(
      std::span<const double> theta) const override;
  bool has_exact_sampler() const override { return true; }
  void sample_exact(std::span<const double> theta, CounterRng& rng,
                    std::span<double> out) const override;
  std::optional<double> hessian_bound(
      std::span<const double> theta) const override;
  int z_index() const override { return 2 * d_; }
  std::vector<std::pair<double, double>> support_hint(
      std::span<const double> theta) const override;

 private:
  int d_;
};

// U(x) = |x - mu|^2 / 2; everything is exact, used as an oracle.
class GaussianModel final : public EnergyModel {
 public:
  explicit GaussianModel(int d) : d_(d) {}

  int dimension() const override { return d_; }
  int param_count() const override { return d_; }
  std::string name() const override { return "gaussian"; }

  double energy(std::span<const double> theta,
                std::span<const double> x) const override;
  void grad_x(std::span<const double> theta, std::span<const double> x,
              std::span<double> out) const override;
  void grad_theta(std::span<const double> theta, std::span<const double> x,
                  std::span<double> out) const override;

  std::optional<double> exact_log_partition(
      std::span<const double> theta) const override;
  bool has_exact_sampler() const override { return true; }
  void sample_exact(std::span<const double> theta, CounterRng& rng,
                    std::span<double> out) const override;
  std::optional<double> hessian_bound(
      std::span<const double> /*theta*/) const override {
    return 1.0;
  }
  std::vector<std::pair<double, double>> support_hint(
      std::span<const double> theta) const override;

 private:
  int d_;
};

// The 1-d two-mode mixture with frozen means and z as the sole parameter.
class Gmm1dZModel final : public EnergyModel {
 public:
  Gmm1dZModel(double a, double b) : a_(a), b_(b) {}

  int dimension() const override { return 1; }
  int param_count() const override { return 1; }
  std::string name() const override { return "gmm1d-z"; }

  double a() const { return a_; }
  double b() const { return b_; }

  double energy(std::span<const double> theta,
                std::span<const double> x) const override;
  void grad_x(std::span<const double> theta, std::span<const double> x,
              std::span<double> out) const override;
  void grad_theta(std::span<const double> theta, std::span<const double> x,
                  std::span<double> out) const override;

  std::optional<double> exact_log_partition(
      std::span<const double> theta) const override;
  bool has_exact_sampler() const override { return true; }
  void sample_exact(std::span<const double> theta, CounterRng& rng,
                    std::span<double> out) const override;
  std::optional<double> hessian_bound(
      std::span<const double> /*theta*/) const override {
    return 1.0 + (a_ - b_) * (a_ - b_) / 4.0;
  }
  int z_index() const override { return 0; }
  std::vector<std::pair<double, double>> support_hint(
      std::span<const double> theta) const override;

 private:
  double a_, b_;
};

// log(1 + e^t) without overflow.
double softplus(double t);
// 1 / (1 + e^{-t}).
double sigmoid(double t);

// Convenience wrappers on the two-mode mixture.
double gmm_energy(const GmmParams& p, std::span<const double> x);
std::vector<double> gmm_grad_theta(const GmmParams& p,
                                   std::span<const double> x);
double gmm_log_partition(const GmmParams& p);

// n independent draws from the mixture density with parameters p. Each point
// uses its own counter sub-stream, so the dataset is identical regardless of
// evaluation order.
Dataset gmm_sample_target(const GmmParams& p, std::int64_t n,
                          std::uint64_t seed);

// Model registry used by the CLI; `gmm1d-z` takes the frozen means.
std::unique_ptr<EnergyModel> make_model(const std::string& name, int dim,
                                        double fixed_a = 0.0,
                                        double fixed_b = 0.0);

}  // namespace smcebm
