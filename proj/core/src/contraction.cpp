// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#include "mcf/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mcf/errors.hpp"
#include "mcf/parallel.hpp"

namespace mcf {

// ---------------------------------------------------------------------------
// Lyapunov metric

LyapunovMetric::LyapunovMetric(SymmetricMatrix p)
    : p_(std::move(p)), min_eig_(0.0), identity_(p_.is_identity()) {
  if (p_.dim() == 0) throw ValidationError("LyapunovMetric: empty matrix");
  min_eig_ = identity_ ? 1.0 : sym_eig(p_).values[0];
  if (!(min_eig_ > 1e-12)) throw ValidationError("LyapunovMetric: P must be symmetric positive definite");
}

LyapunovMetric LyapunovMetric::identity(std::size_t dim) { return LyapunovMetric(SymmetricMatrix::identity(dim)); }

double lyapunov_value(const LyapunovMetric& metric, const Vector& e) {
  if (metric.is_identity()) {
    if (e.dim() != metric.dim()) throw ValidationError("lyapunov_value: dimension mismatch");
    return squared_norm(e);
  }
  return quad_form(metric.p(), e);
}

// ---------------------------------------------------------------------------
// Contraction and regulator functions

ContractionFn ContractionFn::example_sqrt() { return ContractionFn{}; }

ContractionFn ContractionFn::quadratic_clamped(double alpha, double c_max) {
  if (!(alpha > 0.0)) throw ValidationError("quadratic-clamped contraction: alpha must be > 0");
  if (!(c_max > 0.0 && c_max < 1.0)) throw ValidationError("quadratic-clamped contraction: c_max must be in (0, 1)");
  return ContractionFn{Kind::kQuadraticClamped, alpha, 0.0, c_max};
}

ContractionFn ContractionFn::constant(double level) {
  if (!(level >= 0.0 && level < 1.0)) throw ValidationError("constant contraction: level must be in [0, 1)");
  return ContractionFn{Kind::kConstant, 0.0, level, level};
}

double contraction_value(const ContractionFn& c, const LyapunovMetric& metric, const Vector& e) {
  switch (c.kind) {
    case ContractionFn::Kind::kExampleSqrt:
      return 1.0 - 1.0 / std::sqrt(lyapunov_value(metric, e) + 1.0);
    case ContractionFn::Kind::kQuadraticClamped:
      return std::min(c.alpha * squared_norm(e), c.c_max);
    case ContractionFn::Kind::kConstant:
      return c.level;
  }
  return 0.0;
}

RegulatorFn RegulatorFn::example_sqrt() { return RegulatorFn{}; }

RegulatorFn RegulatorFn::power_law(double p, double c1, double c2, double x0) {
  if (c2 < 0.0) c2 = c1;
  if (!(p >= 1.0)) throw ValidationError("power-law regulator: p must be >= 1 for convexity");
  if (!(c1 > 0.0) || !(c2 >= c1)) throw ValidationError("power-law regulator: need 0 < c1 <= c2");
  if (!(x0 > 0.0)) throw ValidationError("power-law regulator: x0 must be > 0");
  return RegulatorFn{Kind::kPowerLaw, p, c1, c2, x0};
}

double regulator_value(const RegulatorFn& f, double r) {
  if (!(r >= 0.0)) throw ValidationError("regulator_value: r must be >= 0");
  switch (f.kind) {
    case RegulatorFn::Kind::kExampleSqrt:
      return r * (1.0 - 1.0 / std::sqrt(r + 1.0));
    case RegulatorFn::Kind::kPowerLaw:
      return f.p == 1.0 ? f.c1 * r : f.c1 * std::pow(r, f.p);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Contraction map

ContractionMap::ContractionMap(ContractionFn c, MatrixFn fn, LyapunovMetric metric)
    : c_(c), matrix_fn_(std::move(fn)), metric_(std::move(metric)) {}

ContractionMap ContractionMap::scaled_identity(ContractionFn c, LyapunovMetric metric) {
  return ContractionMap(c, nullptr, std::move(metric));
}

ContractionMap ContractionMap::explicit_matrix(MatrixFn fn, LyapunovMetric metric) {
  if (!fn) throw ValidationError("ContractionMap: empty matrix function");
  return ContractionMap(ContractionFn::constant(0.0), std::move(fn), std::move(metric));
}

Matrix ContractionMap::at(const Vector& e) const {
  if (matrix_fn_) return matrix_fn_(e);
  const double c = contraction_value(c_, metric_, e);
  return std::sqrt(1.0 - c) * Matrix::identity(e.dim());
}

Vector ContractionMap::apply(const Vector& e) const {
  if (e.dim() != metric_.dim()) throw ValidationError("ContractionMap: dimension mismatch");
  if (matrix_fn_) return matrix_fn_(e) * e;
  return std::sqrt(1.0 - contraction_value(c_, metric_, e)) * e;
}

// ---------------------------------------------------------------------------
// Contraction and regulation checks

double default_contraction_tolerance(const LyapunovMetric& metric) noexcept {
  return 1e-9 * metric.p().matrix().max_abs();
}

bool check_matrix_contraction(const Matrix& a, const LyapunovMetric& metric, double c_at_e, double tol) {
  if (!a.square() || a.rows() != metric.dim()) {
    throw ValidationError("check_matrix_contraction: A must be " + std::to_string(metric.dim()) + "x" +
                          std::to_string(metric.dim()));
  }
  if (!(c_at_e >= 0.0 && c_at_e < 1.0)) throw ValidationError("check_matrix_contraction: c must lie in [0, 1)");
  const Matrix& p = metric.p().matrix();
  Matrix gap = (1.0 - c_at_e) * p - a.transpose() * p * a;
  return sym_eig(SymmetricMatrix::symmetrize(gap)).values[0] >= -tol;
}

std::vector<Vector> regulation_probe_grid(const LyapunovMetric& metric, RngState& rng, std::size_t count,
                                          double v_min, double v_max) {
  if (count < 2 || !(v_min > 0.0) || !(v_max > v_min)) throw ValidationError("regulation_probe_grid: bad range");
  const std::size_t d = metric.dim();
  std::vector<Vector> probes;
  probes.reserve(count + 1);
  probes.emplace_back(d);
  const double log_lo = std::log(v_min);
  const double log_step = (std::log(v_max) - log_lo) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) {
    Vector dir(d);
    double v_dir = 0.0;
    while (!(v_dir > 0.0)) {
      for (std::size_t i = 0; i < d; ++i) dir[i] = rng.normal();
      v_dir = lyapunov_value(metric, dir);
    }
    const double target = std::exp(log_lo + log_step * static_cast<double>(k));
    probes.push_back(std::sqrt(target / v_dir) * dir);
  }
  return probes;
}

bool check_regulation(const ContractionFn& c, const RegulatorFn& f, const LyapunovMetric& metric,
                      std::span<const Vector> probes, double tol) {
  if (probes.empty()) throw ValidationError("check_regulation: no probe points");
  for (const auto& e : probes) {
    const double v = lyapunov_value(metric, e);
    if (contraction_value(c, metric, e) * v < regulator_value(f, v) - tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Recurrence machinery

std::vector<double> recurrence_simulate(const RegulatorFn& f, double x0, std::span<const double> noise_bounds,
                                        std::size_t steps) {
  if (steps == 0) throw ValidationError("recurrence_simulate: steps must be >= 1");
  if (!(x0 >= 0.0)) throw ValidationError("recurrence_simulate: x0 must be >= 0");
  if (noise_bounds.size() < steps) throw ValidationError("recurrence_simulate: fewer noise bounds than steps");
  std::vector<double> x(steps + 1);
  x[0] = x0;
  for (std::size_t t = 0; t < steps; ++t) {
    const double b = noise_bounds[t];
    if (!(b >= 0.0)) throw ValidationError("recurrence_simulate: noise bounds must be >= 0");
    x[t + 1] = std::max(0.0, x[t] - regulator_value(f, x[t]) + b);
  }
  return x;
}

std::vector<double> power_law_bounds(std::size_t steps, double beta, double scale) {
  std::vector<double> b(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    b[t] = scale * std::pow(static_cast<double>(std::max<std::size_t>(t, 1)), -beta);
  }
  return b;
}

DecayFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw ValidationError("fit_line: need two or more (x, y) pairs");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  DecayFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

DecayFit fit_decay_rate(std::span<const double> trajectory, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) {
    throw ValidationError("fit_decay_rate: tail_fraction must be in (0, 1)");
  }
  if (trajectory.size() < 3) throw ValidationError("fit_decay_rate: trajectory too short");
  const std::size_t last = trajectory.size() - 1;
  const auto first = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil((1.0 - tail_fraction) * static_cast<double>(last))));
  if (last - first < 1) throw ValidationError("fit_decay_rate: tail window has fewer than two points");
  std::vector<double> xs, ys;
  xs.reserve(last - first + 1);
  ys.reserve(last - first + 1);
  for (std::size_t t = first; t <= last; ++t) {
    if (!(trajectory[t] > 0.0)) {
      throw ValidationError("fit_decay_rate: nonpositive value at t=" + std::to_string(t) +
                            " (exponential decay reached the numeric floor; use fit_exponential_rate)");
    }
    xs.push_back(std::log(static_cast<double>(t)));
    ys.push_back(std::log(trajectory[t]));
  }
  return fit_line(xs, ys);
}

DecayFit fit_exponential_rate(std::span<const double> trajectory, std::size_t begin, std::size_t end) {
  if (end > trajectory.size() || end < begin + 2) throw ValidationError("fit_exponential_rate: bad window");
  std::vector<double> xs, ys;
  for (std::size_t t = begin; t < end; ++t) {
    if (!(trajectory[t] > 0.0)) throw ValidationError("fit_exponential_rate: nonpositive value in window");
    xs.push_back(static_cast<double>(t));
    ys.push_back(std::log(trajectory[t]));
  }
  return fit_line(xs, ys);
}

double predicted_decay_exponent(double p, double beta) {
  if (!(p >= 1.0) || !(beta > 0.0)) throw ValidationError("predicted_decay_exponent: need p >= 1 and beta > 0");
  if (p == 1.0) return -beta;
  return -std::min(1.0 / (p - 1.0), beta / p);
}

double limsup_bound(const RegulatorFn& f, double b) {
  if (!(b > 0.0)) throw ValidationError("limsup_bound: b must be > 0");
  double hi = 1.0;
  for (int k = 0; regulator_value(f, hi) <= b; ++k) {
    if (k > 2000) throw ValidationError("limsup_bound: f does not exceed b");
    hi *= 2.0;
  }
  double lo = 0.0;
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (regulator_value(f, mid) > b) hi = mid; else lo = mid;
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Concentration

ConcentrationParams::ConcentrationParams(double c1_, double c2_, double gamma_, double kappa_)
    : c1(c1_), c2(c2_), gamma(gamma_), kappa(kappa_) {
  if (!(c1 > 0.0 && c2 > 0.0 && gamma > 0.0 && kappa > 0.0)) {
    throw ValidationError("ConcentrationParams: all constants must be > 0");
  }
}

double ConcentrationParams::bound(double n, double delta) const noexcept {
  return c1 * std::exp(-c2 * std::pow(n, kappa) * std::pow(delta, gamma));
}

std::vector<ConcentrationPoint> measure_concentration(const ExpFamilyModel& model, const Parameter& theta,
                                                      std::span<const std::size_t> sizes, double delta,
                                                      std::size_t trials, const RngState& rng) {
  if (trials < 100) throw ValidationError("measure_concentration: trials must be >= 100");
  if (!(delta >= 0.0)) throw ValidationError("measure_concentration: delta must be >= 0");
  std::vector<ConcentrationPoint> out;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    const std::size_t n = sizes[j];
    if (n == 0) throw ValidationError("measure_concentration: sample sizes must be >= 1");
    const RngState size_rng = rng.substream(j);
    std::vector<unsigned char> hit(trials, 0);
    parallel_for(trials, [&](std::size_t k) {
      RngState trial_rng = size_rng.substream(k);
      const Parameter est = estimate(model, sample(model, theta, n, trial_rng));
      hit[k] = norm(est.theta - theta.theta) >= delta ? 1 : 0;
    });
    std::size_t count = 0;
    for (auto h : hit) count += h;
    out.push_back({n, static_cast<double>(count) / static_cast<double>(trials)});
  }
  return out;
}

}  // namespace mcf
