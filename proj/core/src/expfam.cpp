// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#include "mcf/expfam.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mcf/errors.hpp"

namespace mcf {

struct ExpFamilyModel::GaussianData {
  SymmetricMatrix covariance;
  SymmetricMatrix precision;
  bool identity;
};

std::string_view family_name(Family f) noexcept {
  switch (f) {
    case Family::kGaussian: return "gaussian";
    case Family::kPoisson: return "poisson";
    case Family::kBernoulli: return "bernoulli";
    case Family::kExponential: return "exponential";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "gaussian") return Family::kGaussian;
  if (name == "poisson") return Family::kPoisson;
  if (name == "bernoulli") return Family::kBernoulli;
  if (name == "exponential") return Family::kExponential;
  throw ValidationError("unknown family '" + std::string(name) + "'");
}

ExpFamilyModel::ExpFamilyModel(Family family, std::size_t dim, std::shared_ptr<const GaussianData> gauss)
    : family_(family), dim_(dim), gauss_(std::move(gauss)) {
  if (dim_ == 0) throw ValidationError("ExpFamilyModel: dim must be >= 1");
}

ExpFamilyModel ExpFamilyModel::gaussian(std::size_t dim) {
  if (dim == 0) throw ValidationError("ExpFamilyModel: dim must be >= 1");
  auto id = SymmetricMatrix::identity(dim);
  return ExpFamilyModel(Family::kGaussian, dim, std::make_shared<const GaussianData>(GaussianData{id, id, true}));
}

ExpFamilyModel ExpFamilyModel::gaussian(const SymmetricMatrix& covariance) {
  if (covariance.dim() == 0) throw ValidationError("ExpFamilyModel: dim must be >= 1");
  if (!is_spd(covariance, 0.0)) throw ValidationError("ExpFamilyModel: covariance must be positive definite");
  const bool id = covariance.is_identity();
  return ExpFamilyModel(
      Family::kGaussian, covariance.dim(),
      std::make_shared<const GaussianData>(GaussianData{covariance, id ? covariance : spd_inverse(covariance), id}));
}

ExpFamilyModel ExpFamilyModel::poisson(std::size_t dim) { return ExpFamilyModel(Family::kPoisson, dim, nullptr); }
ExpFamilyModel ExpFamilyModel::bernoulli(std::size_t dim) { return ExpFamilyModel(Family::kBernoulli, dim, nullptr); }
ExpFamilyModel ExpFamilyModel::exponential(std::size_t dim) {
  return ExpFamilyModel(Family::kExponential, dim, nullptr);
}

ExpFamilyModel ExpFamilyModel::make(Family family, std::size_t dim) {
  switch (family) {
    case Family::kGaussian: return gaussian(dim);
    case Family::kPoisson: return poisson(dim);
    case Family::kBernoulli: return bernoulli(dim);
    case Family::kExponential: return exponential(dim);
  }
  throw ValidationError("unknown family");
}

const SymmetricMatrix& ExpFamilyModel::covariance() const {
  if (!gauss_) throw ValidationError("covariance: model is not Gaussian");
  return gauss_->covariance;
}

const SymmetricMatrix& ExpFamilyModel::precision() const {
  if (!gauss_) throw ValidationError("precision: model is not Gaussian");
  return gauss_->precision;
}

bool ExpFamilyModel::identity_covariance() const noexcept { return gauss_ && gauss_->identity; }

namespace {

void require_dim(const ExpFamilyModel& model, std::size_t dim, const char* what) {
  if (dim != model.dim()) {
    throw ValidationError(std::string(what) + ": expected dimension " + std::to_string(model.dim()) + ", got " +
                          std::to_string(dim));
  }
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double weight_floor(std::size_t n) noexcept { return 1e-6 * static_cast<double>(n); }

Vector sufficient_stat(const ExpFamilyModel& model, const Vector& x) {
  require_dim(model, x.dim(), "sufficient_stat");
  for (std::size_t i = 0; i < x.dim(); ++i) {
    const double v = x[i];
    if (!std::isfinite(v)) throw ValidationError("sufficient_stat: non-finite observation");
    switch (model.family()) {
      case Family::kGaussian: break;
      case Family::kPoisson:
        if (v < 0.0 || v != std::floor(v)) {
          throw ValidationError("sufficient_stat: Poisson observation must be a non-negative integer");
        }
        break;
      case Family::kBernoulli:
        if (v != 0.0 && v != 1.0) throw ValidationError("sufficient_stat: Bernoulli observation must be 0 or 1");
        break;
      case Family::kExponential:
        if (v < 0.0) throw ValidationError("sufficient_stat: exponential observation must be >= 0");
        break;
    }
  }
  return x;
}

Vector mean_map(const ExpFamilyModel& model, const Parameter& theta) {
  require_dim(model, theta.dim(), "mean_map");
  const Vector& t = theta.theta;
  switch (model.family()) {
    case Family::kGaussian:
      return model.identity_covariance() ? t : model.covariance().matrix() * t;
    case Family::kPoisson: {
      Vector m(t.dim());
      for (std::size_t i = 0; i < t.dim(); ++i) m[i] = std::exp(t[i]);
      return m;
    }
    case Family::kBernoulli: {
      Vector m(t.dim());
      for (std::size_t i = 0; i < t.dim(); ++i) m[i] = sigmoid(t[i]);
      return m;
    }
    case Family::kExponential: {
      Vector m(t.dim());
      for (std::size_t i = 0; i < t.dim(); ++i) {
        if (!(t[i] < 0.0)) throw ValidationError("mean_map: exponential natural parameter must be < 0");
        m[i] = -1.0 / t[i];
      }
      return m;
    }
  }
  throw ValidationError("mean_map: unknown family");
}

Parameter inverse_mean_map(const ExpFamilyModel& model, const Vector& tbar) {
  require_dim(model, tbar.dim(), "inverse_mean_map");
  if (!tbar.all_finite()) throw ValidationError("inverse_mean_map: non-finite statistic");
  Vector theta(tbar.dim());
  switch (model.family()) {
    case Family::kGaussian:
      return Parameter{model.identity_covariance() ? tbar : model.precision().matrix() * tbar};
    case Family::kPoisson:
      for (std::size_t i = 0; i < tbar.dim(); ++i) {
        if (!(tbar[i] > 0.0)) {
          throw BoundaryError("inverse_mean_map: Poisson mean " + std::to_string(tbar[i]) +
                              " is on the boundary of (0, inf)");
        }
        theta[i] = std::log(tbar[i]);
      }
      break;
    case Family::kBernoulli:
      for (std::size_t i = 0; i < tbar.dim(); ++i) {
        if (!(tbar[i] > 0.0 && tbar[i] < 1.0)) {
          throw BoundaryError("inverse_mean_map: Bernoulli mean " + std::to_string(tbar[i]) +
                              " is on the boundary of (0, 1)");
        }
        theta[i] = std::log(tbar[i]) - std::log1p(-tbar[i]);
      }
      break;
    case Family::kExponential:
      for (std::size_t i = 0; i < tbar.dim(); ++i) {
        if (!(tbar[i] > 0.0)) {
          throw BoundaryError("inverse_mean_map: exponential mean " + std::to_string(tbar[i]) +
                              " is on the boundary of (0, inf)");
        }
        theta[i] = -1.0 / tbar[i];
      }
      break;
  }
  return Parameter{std::move(theta)};
}

Matrix inverse_mean_jacobian(const ExpFamilyModel& model, const Vector& tbar) {
  require_dim(model, tbar.dim(), "inverse_mean_jacobian");
  const std::size_t d = tbar.dim();
  if (model.family() == Family::kGaussian) {
    return model.identity_covariance() ? Matrix::identity(d) : model.precision().matrix();
  }
  // Separable families: dθ/dt = 1 / Φ''(θ) coordinate-wise.
  Matrix j(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    const double t = tbar[i];
    switch (model.family()) {
      case Family::kPoisson:
        if (!(t > 0.0)) throw BoundaryError("inverse_mean_jacobian: Poisson mean on boundary");
        j(i, i) = 1.0 / t;
        break;
      case Family::kBernoulli:
        if (!(t > 0.0 && t < 1.0)) throw BoundaryError("inverse_mean_jacobian: Bernoulli mean on boundary");
        j(i, i) = 1.0 / (t * (1.0 - t));
        break;
      case Family::kExponential:
        if (!(t > 0.0)) throw BoundaryError("inverse_mean_jacobian: exponential mean on boundary");
        j(i, i) = 1.0 / (t * t);
        break;
      case Family::kGaussian:
        break;
    }
  }
  return j;
}

Vector mean_sufficient_stat(const ExpFamilyModel& model, const Dataset& data) {
  if (data.empty()) throw ValidationError("estimate: empty dataset");
  Vector sum(model.dim());
  for (const auto& x : data) sum += sufficient_stat(model, x);
  sum *= 1.0 / static_cast<double>(data.size());
  return sum;
}

Vector weighted_mean_sufficient_stat(const ExpFamilyModel& model, const Dataset& data, const Vector& weights) {
  if (data.empty()) throw ValidationError("weighted_estimate: empty dataset");
  if (weights.dim() != data.size()) {
    throw ValidationError("weighted_estimate: " + std::to_string(weights.dim()) + " weights for " +
                          std::to_string(data.size()) + " points");
  }
  double total = 0.0;
  bool uniform = true;
  for (std::size_t i = 0; i < weights.dim(); ++i) {
    const double w = weights[i];
    if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("weighted_estimate: weight outside [0, 1]");
    total += w;
    uniform = uniform && w == weights[0];
  }
  if (total <= weight_floor(data.size())) {
    throw DegenerateSelectionError("weighted_estimate: total weight " + std::to_string(total) +
                                   " is below the selection floor");
  }
  if (uniform) return mean_sufficient_stat(model, data);

  Vector sum(model.dim());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (weights[i] == 0.0) {
      sufficient_stat(model, data[i]);
      continue;
    }
    sum += weights[i] * sufficient_stat(model, data[i]);
  }
  sum *= 1.0 / total;
  return sum;
}

Parameter estimate(const ExpFamilyModel& model, const Dataset& data) {
  return inverse_mean_map(model, mean_sufficient_stat(model, data));
}

Parameter weighted_estimate(const ExpFamilyModel& model, const Dataset& data, const Vector& weights) {
  return inverse_mean_map(model, weighted_mean_sufficient_stat(model, data, weights));
}

Dataset sample(const ExpFamilyModel& model, const Parameter& theta, std::size_t n, RngState& rng) {
  if (n == 0) throw ValidationError("sample: n must be >= 1");
  const Vector mean = mean_map(model, theta);
  Dataset out;
  out.reserve(n);
  if (model.family() == Family::kGaussian) {
    const GaussianSampler draw(mean, model.covariance());
    for (std::size_t k = 0; k < n; ++k) out.push_back(draw(rng));
    return out;
  }
  for (std::size_t k = 0; k < n; ++k) {
    Vector x(model.dim());
    for (std::size_t i = 0; i < x.dim(); ++i) {
      switch (model.family()) {
        case Family::kPoisson: x[i] = static_cast<double>(rng.poisson(mean[i])); break;
        case Family::kBernoulli: x[i] = rng.uniform() < mean[i] ? 1.0 : 0.0; break;
        case Family::kExponential: x[i] = rng.exponential(1.0 / mean[i]); break;
        case Family::kGaussian: break;
      }
    }
    out.push_back(std::move(x));
  }
  return out;
}

double solve_mean_equation(const std::function<double(double)>& mean,
                           const std::function<double(double)>& derivative, double target, double initial) {
  if (!std::isfinite(target)) throw ValidationError("solve_mean_equation: non-finite target");
  // Bracket [lo, hi] with mean(lo) <= target <= mean(hi), expanding geometrically.
  double lo = initial - 1.0;
  double hi = initial + 1.0;
  double step = 1.0;
  for (int k = 0; mean(lo) > target; ++k) {
    if (k > 200) throw BoundaryError("solve_mean_equation: target below the mean range");
    step *= 2.0;
    lo = initial - step;
  }
  step = 1.0;
  for (int k = 0; mean(hi) < target; ++k) {
    if (k > 200) throw BoundaryError("solve_mean_equation: target above the mean range");
    step *= 2.0;
    hi = initial + step;
  }

  double x = std::clamp(initial, lo, hi);
  for (int iter = 0; iter < 100; ++iter) {
    const double r = mean(x) - target;
    if (std::abs(r) <= 1e-12 * std::max(1.0, std::abs(target))) return x;
    if (r > 0.0) hi = x; else lo = x;
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(x))) return 0.5 * (lo + hi);
    const double d = derivative(x);
    double next = (d > 0.0 && std::isfinite(d)) ? x - r / d : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

}  // namespace mcf
