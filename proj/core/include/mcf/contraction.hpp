// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mcf/expfam.hpp"
#include "mcf/linalg.hpp"
#include "mcf/random.hpp"

namespace mcf {

/// Quadratic Lyapunov function V(e) = eᵀPe with P ≻ 0 (smallest eigenvalue
/// above 1e-12, checked on construction).
class LyapunovMetric {
 public:
  explicit LyapunovMetric(SymmetricMatrix p);
  static LyapunovMetric identity(std::size_t dim);

  const SymmetricMatrix& p() const noexcept { return p_; }
  std::size_t dim() const noexcept { return p_.dim(); }
  bool is_identity() const noexcept { return identity_; }
  double min_eigenvalue() const noexcept { return min_eig_; }

 private:
  SymmetricMatrix p_;
  double min_eig_;
  bool identity_;
};

/// V(e) = eᵀPe.
double lyapunov_value(const LyapunovMetric& metric, const Vector& e);

/// Contraction strength c: ℝᵖ → [0, 1).
struct ContractionFn {
  enum class Kind {
    kExampleSqrt,       // 1 − (V(e) + 1)^{-1/2}
    kQuadraticClamped,  // min(α‖e‖², c_max)
    kConstant,          // level
  };

  Kind kind = Kind::kExampleSqrt;
  double alpha = 0.0;
  double level = 0.0;
  double c_max = 0.9;

  static ContractionFn example_sqrt();
  static ContractionFn quadratic_clamped(double alpha, double c_max = 0.9);
  static ContractionFn constant(double level);
};

double contraction_value(const ContractionFn& c, const LyapunovMetric& metric, const Vector& e);

/// Convex regulator f: ℝ₊ → ℝ₊ with f(0) = 0 lower-bounding c(e)V(e).
struct RegulatorFn {
  enum class Kind {
    kExampleSqrt,  // r (1 − (r + 1)^{-1/2})
    kPowerLaw,     // c1 rᵖ; c2 and x0 describe the admissible envelope
  };

  Kind kind = Kind::kExampleSqrt;
  double p = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double x0 = 1.0;

  static RegulatorFn example_sqrt();
  static RegulatorFn power_law(double p, double c1, double c2 = -1.0, double x0 = 1.0);
};

double regulator_value(const RegulatorFn& f, double r);

/// State-dependent map A(e) of the error recursion e ← A(e)e + ξ.
class ContractionMap {
 public:
  using MatrixFn = std::function<Matrix(const Vector&)>;

  /// A(e) = √(1 − c(e)) I, which meets AᵀPA ⪯ (1 − c)P with equality.
  static ContractionMap scaled_identity(ContractionFn c, LyapunovMetric metric);
  static ContractionMap explicit_matrix(MatrixFn fn, LyapunovMetric metric);

  const LyapunovMetric& metric() const noexcept { return metric_; }
  bool is_scaled_identity() const noexcept { return !matrix_fn_; }
  const ContractionFn& contraction() const noexcept { return c_; }

  Matrix at(const Vector& e) const;
  Vector apply(const Vector& e) const;

 private:
  ContractionMap(ContractionFn c, MatrixFn fn, LyapunovMetric metric);

  ContractionFn c_;
  MatrixFn matrix_fn_;
  LyapunovMetric metric_;
};

/// Scale-aware default tolerance for the semidefinite check: 1e-9·‖P‖_max.
double default_contraction_tolerance(const LyapunovMetric& metric) noexcept;

/// True iff λ_min((1 − c)P − AᵀPA) ≥ −tol.
bool check_matrix_contraction(const Matrix& a, const LyapunovMetric& metric, double c_at_e, double tol);

/// Probe set for check_regulation: `count` points with V log-spaced on
/// [v_min, v_max], each along a fresh random direction, plus e = 0.
std::vector<Vector> regulation_probe_grid(const LyapunovMetric& metric, RngState& rng, std::size_t count = 256,
                                          double v_min = 1e-6, double v_max = 1e3);

/// True iff c(e)V(e) ≥ f(V(e)) − tol at every probe point.
bool check_regulation(const ContractionFn& c, const RegulatorFn& f, const LyapunovMetric& metric,
                      std::span<const Vector> probes, double tol);

/// Comparison recursion x_{t+1} = max(0, x_t − f(x_t) + b_t), t = 0..steps−1.
/// Returns the trajectory x_0..x_steps.
std::vector<double> recurrence_simulate(const RegulatorFn& f, double x0, std::span<const double> noise_bounds,
                                        std::size_t steps);

/// b_t = scale · max(t, 1)^{-β} for t = 0..steps−1.
std::vector<double> power_law_bounds(std::size_t steps, double beta, double scale = 1.0);

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least-squares line through (xs, ys).
DecayFit fit_line(std::span<const double> xs, std::span<const double> ys);

/// Least-squares slope of log x_t against log t over the final
/// tail_fraction of the steps. Throws ValidationError on a nonpositive
/// value in the window.
DecayFit fit_decay_rate(std::span<const double> trajectory, double tail_fraction);

/// Least-squares slope of log x_t against t for t in [begin, end).
DecayFit fit_exponential_rate(std::span<const double> trajectory, std::size_t begin, std::size_t end);

/// Decay exponent of the rate bound for f ~ xᵖ and noise ~ t^{-β}:
/// −min(1/(p−1), β/p) for p > 1, and −β (the polynomial floor) for p = 1.
double predicted_decay_exponent(double p, double beta);

/// Largest root L of f(x) = b, by bisection to 1e-12.
double limsup_bound(const RegulatorFn& f, double b);

/// Constants of the concentration bound P(‖θ̂ − θ‖ ≥ δ) ≤ C1 exp(−C2 nᵏ δ^γ).
struct ConcentrationParams {
  double c1;
  double c2;
  double gamma;
  double kappa;

  ConcentrationParams(double c1, double c2, double gamma, double kappa);
  double bound(double n, double delta) const noexcept;
};

struct ConcentrationPoint {
  std::size_t n;
  double exceedance;
};

/// Monte-Carlo estimate of P(‖estimate(D_n) − θ‖₂ ≥ δ) for each n. Trial k
/// of size index j draws from rng.substream(j).substream(k).
std::vector<ConcentrationPoint> measure_concentration(const ExpFamilyModel& model, const Parameter& theta,
                                                      std::span<const std::size_t> sizes, double delta,
                                                      std::size_t trials, const RngState& rng);

}  // namespace mcf
