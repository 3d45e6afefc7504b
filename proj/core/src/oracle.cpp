// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#include "mcf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "mcf/errors.hpp"

namespace mcf {

namespace {

constexpr int kMaxNewtonIterations = 100;

// Gaussian elimination with partial pivoting; nullopt when singular.
std::optional<Vector> solve_dense(Matrix a, Vector b) {
  const std::size_t n = b.dim();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (!(std::abs(a(pivot, col)) > 1e-300)) return std::nullopt;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(col, c), a(pivot, c));
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a(r, col) / a(col, col);
      for (std::size_t c = col; c < n; ++c) a(r, c) -= factor * a(col, c);
      b[r] -= factor * b[col];
    }
  }
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a(i, c) * x[c];
    x[i] = s / a(i, i);
  }
  if (!x.all_finite()) return std::nullopt;
  return x;
}

Vector pseudo_solve(const SymmetricMatrix& s, const Vector& rhs) {
  const auto eig = sym_eig(s);
  const double cutoff = 1e-12 * std::max(std::abs(eig.values[eig.values.dim() - 1]), 1e-300);
  Vector x(rhs.dim());
  for (std::size_t k = 0; k < eig.values.dim(); ++k) {
    if (eig.values[k] <= cutoff) continue;
    const Vector q = eig.vectors.column(k);
    x += (dot(q, rhs) / eig.values[k]) * q;
  }
  return x;
}

struct Tilt {
  Vector weights;
  Vector residual;  // Σ wᵢ (Tᵢ − target)
  double total = 0.0;
};

Tilt clipped_tilt(const std::vector<Vector>& stats, const std::vector<Vector>& centered, const Vector& target,
                  const Vector& beta) {
  Tilt out{Vector(stats.size()), Vector(target.dim()), 0.0};
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const double w = std::max(0.0, 1.0 + dot(beta, centered[i]));
    out.weights[i] = w;
    out.total += w;
    if (w > 0.0) out.residual += w * (stats[i] - target);
  }
  return out;
}

Vector weighted_mean(const std::vector<Vector>& stats, const Vector& weights) {
  Vector sum(stats.front().dim());
  double total = 0.0;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (weights[i] == 0.0) continue;
    sum += weights[i] * stats[i];
    total += weights[i];
  }
  sum *= 1.0 / total;
  return sum;
}

void normalize_max(Vector& w) {
  const double top = *std::max_element(w.begin(), w.end());
  for (double& x : w) x = std::min(1.0, x / top);
}

}  // namespace

PullbackWeights oracle_pullback_weights(const ExpFamilyModel& model, const Dataset& candidates,
                                        const Parameter& theta_good, double gamma) {
  if (candidates.empty()) throw ValidationError("oracle_pullback_weights: no candidates");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("oracle_pullback_weights: gamma must be in [0, 1]");
  const std::size_t n = candidates.size();
  const std::size_t d = model.dim();

  std::vector<Vector> stats;
  stats.reserve(n);
  for (const auto& x : candidates) stats.push_back(sufficient_stat(model, x));
  const Vector m = mean_sufficient_stat(model, candidates);
  const Vector g = mean_map(model, theta_good);
  const Vector offset = m - g;
  const double offset_norm = norm(offset);
  if (gamma == 0.0 || offset_norm == 0.0) return {Vector(n, 1.0), gamma, true};

  const Vector target = g + (1.0 - gamma) * offset;
  const double tol = 1e-8 * std::max(1.0, offset_norm);
  auto finish = [&](Vector w) {
    normalize_max(w);
    const Vector achieved = weighted_mean(stats, w);
    const double got = 1.0 - norm(achieved - g) / offset_norm;
    return PullbackWeights{std::move(w), got, norm(achieved - target) <= tol};
  };

  std::vector<Vector> centered;
  centered.reserve(n);
  Matrix cov(d, d);
  for (const auto& t : stats) {
    centered.push_back(t - m);
    const Vector& c = centered.back();
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) cov(i, j) += c[i] * c[j];
  }
  cov *= 1.0 / static_cast<double>(n);

  // Unclipped tilt: weighted mean is m + Sβ because Σ dᵢ = 0.
  Vector beta = pseudo_solve(SymmetricMatrix::symmetrize(cov), target - m);
  Tilt tilt = clipped_tilt(stats, centered, target, beta);
  bool clipped = false;
  for (std::size_t i = 0; i < n && !clipped; ++i) clipped = 1.0 + dot(beta, centered[i]) < 0.0;
  if (!clipped && tilt.total > 0.0 && norm(tilt.residual) <= tol * tilt.total) return finish(tilt.weights);

  // Semi-smooth Newton on F(β) = Σ max(0, 1 + βᵀdᵢ)(Tᵢ − target).
  for (int iter = 0; iter < kMaxNewtonIterations && tilt.total > 0.0; ++iter) {
    if (norm(tilt.residual) <= 0.1 * tol * tilt.total) break;
    Matrix jac(d, d);
    for (std::size_t i = 0; i < n; ++i) {
      if (tilt.weights[i] <= 0.0) continue;
      const Vector diff = stats[i] - target;
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) jac(r, c) += diff[r] * centered[i][c];
    }
    const auto step = solve_dense(jac, -1.0 * tilt.residual);
    if (!step) break;
    const double merit = norm(tilt.residual);
    bool accepted = false;
    for (double s = 1.0; s > 1e-12; s *= 0.5) {
      const Vector trial_beta = beta + s * (*step);
      Tilt trial = clipped_tilt(stats, centered, target, trial_beta);
      if (trial.total > 0.0 && norm(trial.residual) < (1.0 - 1e-4 * s) * merit) {
        beta = trial_beta;
        tilt = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (tilt.total > 0.0 && norm(tilt.residual) <= tol * tilt.total) return finish(tilt.weights);

  // Nearest-subset fallback: the prefix (by distance to g) whose mean is closest to the target.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = norm(stats[i] - g);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  Vector prefix(d);
  std::size_t best_k = n;
  double best = norm(m - target);
  for (std::size_t k = 1; k <= n; ++k) {
    prefix += stats[order[k - 1]];
    const double err = norm((1.0 / static_cast<double>(k)) * prefix - target);
    if (err < best) {
      best = err;
      best_k = k;
    }
  }
  Vector w(n);
  for (std::size_t k = 0; k < best_k; ++k) w[order[k]] = 1.0;
  return finish(std::move(w));
}

}  // namespace mcf
