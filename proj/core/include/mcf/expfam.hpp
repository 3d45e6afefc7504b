// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mcf/linalg.hpp"
#include "mcf/random.hpp"

namespace mcf {

enum class Family {
  kGaussian,     // mean unknown, covariance known
  kPoisson,      // natural parameter: log-rate
  kBernoulli,    // natural parameter: logit
  kExponential,  // natural parameter: -rate (< 0)
};

std::string_view family_name(Family f) noexcept;
/// Accepts "gaussian", "poisson", "bernoulli", "exponential".
Family parse_family(std::string_view name);

/// Exponential-family model h(x) exp(θᵀT(x) − Φ(θ)). Non-Gaussian families of
/// dimension > 1 are coordinate-wise products, so every map is separable.
class ExpFamilyModel {
 public:
  static ExpFamilyModel gaussian(std::size_t dim);
  static ExpFamilyModel gaussian(const SymmetricMatrix& covariance);
  static ExpFamilyModel poisson(std::size_t dim);
  static ExpFamilyModel bernoulli(std::size_t dim);
  static ExpFamilyModel exponential(std::size_t dim);
  static ExpFamilyModel make(Family family, std::size_t dim);

  Family family() const noexcept { return family_; }
  std::size_t dim() const noexcept { return dim_; }
  /// Known covariance; identity unless constructed otherwise. Gaussian only.
  const SymmetricMatrix& covariance() const;
  /// Inverse of the known covariance. Gaussian only.
  const SymmetricMatrix& precision() const;
  bool identity_covariance() const noexcept;

 private:
  struct GaussianData;
  ExpFamilyModel(Family family, std::size_t dim, std::shared_ptr<const GaussianData> gauss);

  Family family_;
  std::size_t dim_;
  std::shared_ptr<const GaussianData> gauss_;
};

/// Natural parameter θ of an ExpFamilyModel.
struct Parameter {
  Vector theta;

  std::size_t dim() const noexcept { return theta.dim(); }
  friend bool operator==(const Parameter&, const Parameter&) = default;
};

using Dataset = std::vector<Vector>;

/// Selection weights summing to at most this are rejected as degenerate.
double weight_floor(std::size_t n) noexcept;

/// T(x). Throws ValidationError for x outside the family's support.
Vector sufficient_stat(const ExpFamilyModel& model, const Vector& x);

/// ∇Φ(θ) = E_θ[T(x)].
Vector mean_map(const ExpFamilyModel& model, const Parameter& theta);

/// (∇Φ)⁻¹(t̄). Throws BoundaryError when t̄ is on or outside the boundary of
/// the mean domain.
Parameter inverse_mean_map(const ExpFamilyModel& model, const Vector& tbar);

/// Jacobian of (∇Φ)⁻¹ at t̄, i.e. (∇²Φ(θ))⁻¹ at θ = (∇Φ)⁻¹(t̄).
Matrix inverse_mean_jacobian(const ExpFamilyModel& model, const Vector& tbar);

/// Arithmetic mean of T(xᵢ).
Vector mean_sufficient_stat(const ExpFamilyModel& model, const Dataset& data);

/// Σ wᵢ T(xᵢ) / Σ wᵢ. Uniform weights reduce to mean_sufficient_stat bit-for-bit.
Vector weighted_mean_sufficient_stat(const ExpFamilyModel& model, const Dataset& data,
                                     const Vector& weights);

/// The estimator M: (∇Φ)⁻¹ of the mean sufficient statistic.
Parameter estimate(const ExpFamilyModel& model, const Dataset& data);

/// (∇Φ)⁻¹ of the weighted mean sufficient statistic. Weights must lie in
/// [0, 1]; throws DegenerateSelectionError when Σ wᵢ ≤ weight_floor(n).
Parameter weighted_estimate(const ExpFamilyModel& model, const Dataset& data, const Vector& weights);

/// n i.i.d. draws from P_θ.
Dataset sample(const ExpFamilyModel& model, const Parameter& theta, std::size_t n, RngState& rng);

/// Solves mean(θ) = target for a scalar, strictly increasing mean function by
/// Newton iteration safeguarded with a bisection bracket that is expanded
/// geometrically until it encloses the root. Tolerance 1e-12, at most 100
/// Newton/bisection steps after bracketing.
double solve_mean_equation(const std::function<double(double)>& mean,
                           const std::function<double(double)>& derivative, double target,
                           double initial = 0.0);

}  // namespace mcf
