// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#include "mcf/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mcf/errors.hpp"

namespace mcf {

namespace {

constexpr double kProbClamp = 1e-12;
constexpr double kMinWeight = std::numeric_limits<double>::min();
constexpr double kMaxWeight = 1.0 - 0x1.0p-53;

double sigmoid(double s) noexcept {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

/// Per-point forward state kept for backpropagation.
struct ForwardPass {
  std::vector<double> pre;  // N x hidden pre-activations
  std::vector<double> weights;
  std::vector<bool> saturated;  // output clamped, so dw/ds = 0
};

void require_features(const FilterParams& params, const Vector& z) {
  if (z.dim() != params.features()) {
    throw ValidationError("filter forward: expected " + std::to_string(params.features()) + " features, got " +
                          std::to_string(z.dim()));
  }
}

double output_logit(const FilterParams& params, const Vector& z, double* pre) {
  const std::size_t h = params.hidden();
  const std::size_t f = params.features();
  const auto w1 = params.w1();
  const auto b1 = params.b1();
  const auto w2 = params.w2();
  double s = params.b2();
  for (std::size_t j = 0; j < h; ++j) {
    double a = b1[j];
    const double* row = w1.data() + j * f;
    for (std::size_t k = 0; k < f; ++k) a += row[k] * z[k];
    if (pre != nullptr) pre[j] = a;
    if (a > 0.0) s += w2[j] * a;
  }
  return s;
}

double clamp_weight(double w, bool* saturated) noexcept {
  if (w < kMinWeight) {
    if (saturated) *saturated = true;
    return kMinWeight;
  }
  if (w > kMaxWeight) {
    if (saturated) *saturated = true;
    return kMaxWeight;
  }
  if (saturated) *saturated = false;
  return w;
}

ForwardPass run_forward(const FilterParams& params, const LabeledDataset& data) {
  const std::size_t n = data.size();
  ForwardPass fp;
  fp.pre.resize(n * params.hidden());
  fp.weights.resize(n);
  fp.saturated.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    require_features(params, data.features[i]);
    const double s = output_logit(params, data.features[i], fp.pre.data() + i * params.hidden());
    bool sat = false;
    fp.weights[i] = clamp_weight(sigmoid(s), &sat);
    fp.saturated[i] = sat;
  }
  return fp;
}

double bce_term(double w, std::uint8_t y) noexcept {
  const double p = std::clamp(w, kProbClamp, 1.0 - kProbClamp);
  return y == 1 ? -std::log(p) : -std::log(1.0 - p);
}

struct ContractionState {
  Vector tbar;
  Vector e_new;
  double v_new;
  double bound;
  double margin;
};

ContractionState contraction_state(std::span<const double> weights, const LabeledDataset& data,
                                   const Anchors& anchors, const ContractionFn& c, const LyapunovMetric& metric,
                                   const ExpFamilyModel& model) {
  Vector w(std::vector<double>(weights.begin(), weights.end()));
  ContractionState st;
  st.tbar = weighted_mean_sufficient_stat(model, data.points, w);
  st.e_new = inverse_mean_map(model, st.tbar).theta - anchors.theta_good.theta;
  st.v_new = lyapunov_value(metric, st.e_new);
  st.bound = (1.0 - contraction_value(c, metric, anchors.e_est)) * lyapunov_value(metric, anchors.e_est);
  st.margin = st.v_new - st.bound;
  return st;
}

void require_nonempty(const LabeledDataset& data) {
  if (data.size() == 0) throw ValidationError("filter loss: empty dataset");
  data.validate();
}

}  // namespace

// ---------------------------------------------------------------------------
// Parameters

FilterParams::FilterParams(std::size_t hidden, std::size_t features)
    : hidden_(hidden), features_(features), values_(hidden * (features + 2) + 1, 0.0) {
  if (hidden == 0 || features == 0) throw ValidationError("FilterParams: hidden and feature dims must be >= 1");
}

FilterParams::FilterParams(std::size_t hidden, std::size_t features, std::vector<double> flat)
    : hidden_(hidden), features_(features), values_(std::move(flat)) {
  if (hidden == 0 || features == 0) throw ValidationError("FilterParams: hidden and feature dims must be >= 1");
  if (values_.size() != hidden * (features + 2) + 1) {
    throw ValidationError("FilterParams: expected " + std::to_string(hidden * (features + 2) + 1) +
                          " values for hidden=" + std::to_string(hidden) + ", features=" +
                          std::to_string(features) + ", got " + std::to_string(values_.size()));
  }
  for (double v : values_)
    if (!std::isfinite(v)) throw ValidationError("FilterParams: non-finite value");
}

FilterParams FilterParams::glorot(std::size_t hidden, std::size_t features, RngState& rng) {
  FilterParams p(hidden, features);
  const double r1 = std::sqrt(6.0 / static_cast<double>(features + hidden));
  for (double& w : p.w1()) w = r1 * (2.0 * rng.uniform() - 1.0);
  const double r2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  for (double& w : p.w2()) w = r2 * (2.0 * rng.uniform() - 1.0);
  return p;
}

double forward(const FilterParams& params, const Vector& z) {
  require_features(params, z);
  return clamp_weight(sigmoid(output_logit(params, z, nullptr)), nullptr);
}

// ---------------------------------------------------------------------------
// Anchors and configuration

Anchors compute_anchors(const ExpFamilyModel& model, const LabeledDataset& data,
                        const std::optional<Parameter>& theta_good_override) {
  require_nonempty(data);
  Anchors a;
  a.theta_est = estimate(model, data.points);
  if (theta_good_override) {
    if (theta_good_override->dim() != model.dim()) throw ValidationError("compute_anchors: reference dimension");
    a.theta_good = *theta_good_override;
    a.oracle_reference = true;
  } else {
    Dataset good;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (data.labels[i] == 1) good.push_back(data.points[i]);
    if (good.empty()) throw ValidationError("compute_anchors: no good-labeled points");
    a.theta_good = estimate(model, good);
  }
  a.e_est = a.theta_est.theta - a.theta_good.theta;
  return a;
}

LyapunovMetric TrainConfig::lyapunov(std::size_t dim) const {
  if (!metric) return LyapunovMetric::identity(dim);
  if (metric->dim() != dim) throw ValidationError("TrainConfig: metric dimension does not match the model");
  return LyapunovMetric(*metric);
}

void TrainConfig::validate() const {
  if (!(lambda >= 0.0)) throw ValidationError("TrainConfig: lambda must be >= 0");
  if (!(ess_weight >= 0.0)) throw ValidationError("TrainConfig: ess_weight must be >= 0");
  if (!(learning_rate > 0.0)) throw ValidationError("TrainConfig: learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ValidationError("TrainConfig: Adam decays must be in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ValidationError("TrainConfig: epsilon must be > 0");
  if (hidden_dim == 0) throw ValidationError("TrainConfig: hidden_dim must be >= 1");
}

// ---------------------------------------------------------------------------
// Losses

double classification_loss(const FilterParams& params, const LabeledDataset& data) {
  require_nonempty(data);
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) sum += bce_term(forward(params, data.features[i]), data.labels[i]);
  return sum / static_cast<double>(data.size());
}

double contraction_loss(const FilterParams& params, const LabeledDataset& data, const Anchors& anchors,
                        const ContractionFn& c, const LyapunovMetric& metric, const ExpFamilyModel& model) {
  require_nonempty(data);
  const ForwardPass fp = run_forward(params, data);
  return std::max(0.0, contraction_state(fp.weights, data, anchors, c, metric, model).margin);
}

double ess_penalty(std::span<const double> weights) {
  double s1 = 0.0, s2 = 0.0;
  for (double w : weights) {
    s1 += w;
    s2 += w * w;
  }
  if (!(s2 > 0.0)) return 1.0;
  return 1.0 - (s1 * s1 / s2) / static_cast<double>(weights.size());
}

LossParts total_loss(const FilterParams& params, const LabeledDataset& data, const ExpFamilyModel& model,
                     const Anchors& anchors, const TrainConfig& config) {
  require_nonempty(data);
  const ForwardPass fp = run_forward(params, data);
  LossParts out;
  double bce = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) bce += bce_term(fp.weights[i], data.labels[i]);
  out.classification = bce / static_cast<double>(data.size());
  const LyapunovMetric metric = config.lyapunov(model.dim());
  out.contraction =
      std::max(0.0, contraction_state(fp.weights, data, anchors, config.contraction, metric, model).margin);
  out.ess = ess_penalty(fp.weights);
  out.total = out.classification + config.lambda * out.contraction + config.ess_weight * out.ess;
  return out;
}

LossGradient loss_gradient(const FilterParams& params, const LabeledDataset& data, const ExpFamilyModel& model,
                           const Anchors& anchors, const TrainConfig& config) {
  require_nonempty(data);
  const std::size_t n = data.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const ForwardPass fp = run_forward(params, data);
  const LyapunovMetric metric = config.lyapunov(model.dim());
  const ContractionState cs = contraction_state(fp.weights, data, anchors, config.contraction, metric, model);

  LossGradient out{{}, FilterParams(params.hidden(), params.features())};
  double bce = 0.0;
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    bce += bce_term(fp.weights[i], data.labels[i]);
    s1 += fp.weights[i];
    s2 += fp.weights[i] * fp.weights[i];
  }
  out.loss.classification = bce * inv_n;
  out.loss.contraction = std::max(0.0, cs.margin);
  out.loss.ess = 1.0 - (s1 * s1 / s2) * inv_n;
  out.loss.total = out.loss.classification + config.lambda * out.loss.contraction +
                   config.ess_weight * out.loss.ess;

  // dL_contract/dT̄ = 2 Jᵀ P e_new, zero on the flat side of the hinge.
  Vector dtbar(model.dim());
  const bool hinge_active = cs.margin > 0.0;
  if (hinge_active) {
    const Vector pe = metric.p().matrix() * cs.e_new;
    const Matrix jac = inverse_mean_jacobian(model, cs.tbar);
    dtbar = 2.0 * (jac.transpose() * pe);
  }

  const std::size_t h = params.hidden();
  const std::size_t f = params.features();
  auto gw1 = out.gradient.w1();
  auto gb1 = out.gradient.b1();
  auto gw2 = out.gradient.w2();
  const auto w2 = params.w2();
  double gb2 = 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    const double w = fp.weights[i];
    const std::uint8_t y = data.labels[i];
    double g_logit = 0.0;
    if (!fp.saturated[i]) {
      double g_weight = 0.0;
      if (hinge_active) {
        const Vector t = sufficient_stat(model, data.points[i]);
        double dot_term = 0.0;
        for (std::size_t k = 0; k < dtbar.dim(); ++k) dot_term += dtbar[k] * (t[k] - cs.tbar[k]);
        g_weight += config.lambda * dot_term / s1;
      }
      if (config.ess_weight > 0.0) {
        g_weight += config.ess_weight * -inv_n * (2.0 * s1 / s2 - 2.0 * s1 * s1 * w / (s2 * s2));
      }
      g_logit = g_weight * w * (1.0 - w);
      if (w > kProbClamp && w < 1.0 - kProbClamp) g_logit += (w - static_cast<double>(y)) * inv_n;
    }
    if (g_logit == 0.0) continue;
    gb2 += g_logit;
    const double* pre = fp.pre.data() + i * h;
    const Vector& z = data.features[i];
    for (std::size_t j = 0; j < h; ++j) {
      if (pre[j] <= 0.0) continue;
      gw2[j] += g_logit * pre[j];
      const double delta = g_logit * w2[j];
      gb1[j] += delta;
      double* row = gw1.data() + j * f;
      for (std::size_t k = 0; k < f; ++k) row[k] += delta * z[k];
    }
  }
  out.gradient.b2() = gb2;
  return out;
}

// ---------------------------------------------------------------------------
// Optimizer and training

AdamState AdamState::zeros_like(const FilterParams& params) {
  return AdamState{FilterParams(params.hidden(), params.features()),
                   FilterParams(params.hidden(), params.features()), 0};
}

AdamResult adam_step(const FilterParams& params, const FilterParams& gradient, const AdamState& state,
                     const TrainConfig& config) {
  if (!params.same_shape(gradient) || !params.same_shape(state.first_moment) ||
      !params.same_shape(state.second_moment)) {
    throw ValidationError("adam_step: shape mismatch");
  }
  AdamResult out{params, state};
  out.state.step = state.step + 1;
  const double t = static_cast<double>(out.state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  auto& p = out.params.flat();
  auto& m = out.state.first_moment.flat();
  auto& v = out.state.second_moment.flat();
  const auto& g = gradient.flat();
  for (std::size_t k = 0; k < p.size(); ++k) {
    m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
    v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
    const double m_hat = m[k] / correction1;
    const double v_hat = v[k] / correction2;
    p[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
  return out;
}

TrainResult train_filter(const ExpFamilyModel& model, const LabeledDataset& data, const TrainConfig& config,
                         RngState& rng) {
  config.validate();
  require_nonempty(data);
  const std::size_t good = data.good_count();
  if (good == 0 || good == data.size()) {
    throw ValidationError("train_filter: dataset must contain both good and bad labels");
  }
  std::optional<Parameter> reference;
  if (config.theta_good_override) reference = Parameter{*config.theta_good_override};

  TrainResult result;
  result.anchors = compute_anchors(model, data, reference);
  result.params = FilterParams::glorot(config.hidden_dim, data.features.front().dim(), rng);
  AdamState state = AdamState::zeros_like(result.params);
  result.log.reserve(config.epochs);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    LossGradient lg = loss_gradient(result.params, data, model, result.anchors, config);
    result.log.push_back({epoch, lg.loss});
    AdamResult step = adam_step(result.params, lg.gradient, state, config);
    result.params = std::move(step.params);
    state = std::move(step.state);
  }
  result.final_loss = total_loss(result.params, data, model, result.anchors, config);
  return result;
}

double classification_accuracy(const FilterParams& params, const LabeledDataset& data) {
  require_nonempty(data);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool predicted_good = forward(params, data.features[i]) > 0.5;
    if (predicted_good == (data.labels[i] == 1)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

ContractionCertificate verify_contraction(const FilterParams& params, const LabeledDataset& data,
                                          const ExpFamilyModel& model, const Anchors& anchors,
                                          const ContractionFn& c, const LyapunovMetric& metric) {
  require_nonempty(data);
  Vector weights(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) weights[i] = forward(params, data.features[i]);
  const Parameter theta_new = weighted_estimate(model, data.points, weights);
  const Vector e_new = theta_new.theta - anchors.theta_good.theta;
  ContractionCertificate cert;
  cert.v_new = quad_form(metric.p(), e_new);
  cert.bound = (1.0 - contraction_value(c, metric, anchors.e_est)) * quad_form(metric.p(), anchors.e_est);
  cert.holds = cert.v_new <= cert.bound;
  return cert;
}

}  // namespace mcf
