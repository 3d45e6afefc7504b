// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#include "mcf/serialize.hpp"

#include <string>

#include "mcf/errors.hpp"

namespace mcf {

namespace {

const Json& require(const Json& j, std::string_view field) {
  if (!j.is_object()) throw ValidationError("expected an object holding '" + std::string(field) + "'");
  const auto it = j.find(std::string(field));
  if (it == j.end()) throw ValidationError("missing field '" + std::string(field) + "'");
  return *it;
}

double number(const Json& j, std::string_view field) {
  const Json& v = require(j, field);
  if (!v.is_number()) throw ValidationError("field '" + std::string(field) + "' must be a number");
  return v.get<double>();
}

std::size_t count(const Json& j, std::string_view field) {
  const Json& v = require(j, field);
  if (!v.is_number_unsigned()) throw ValidationError("field '" + std::string(field) + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

std::string_view contraction_kind_name(ContractionFn::Kind k) {
  switch (k) {
    case ContractionFn::Kind::kExampleSqrt: return "example-sqrt";
    case ContractionFn::Kind::kQuadraticClamped: return "quadratic-clamped";
    case ContractionFn::Kind::kConstant: return "constant";
  }
  return "unknown";
}

}  // namespace

Json to_json(const Vector& v) { return Json(v.values()); }

Vector vector_from_json(const Json& j, std::string_view field) {
  if (!j.is_array()) throw ValidationError("field '" + std::string(field) + "' must be an array of numbers");
  std::vector<double> values;
  values.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw ValidationError("field '" + std::string(field) + "' must be an array of numbers");
    values.push_back(x.get<double>());
  }
  return Vector(std::move(values));
}

Json to_json(const Matrix& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["values"] = std::vector<double>(m.row_major().begin(), m.row_major().end());
  return j;
}

Matrix matrix_from_json(const Json& j, std::string_view field) {
  const std::size_t rows = count(j, "rows");
  const std::size_t cols = count(j, "cols");
  Vector values = vector_from_json(require(j, "values"), field);
  if (values.dim() != rows * cols) {
    throw ValidationError("field '" + std::string(field) + "': " + std::to_string(values.dim()) +
                          " values for a " + std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
  }
  return Matrix(rows, cols, values.values());
}

Json to_json(const ContractionFn& c) {
  Json j;
  j["kind"] = contraction_kind_name(c.kind);
  j["alpha"] = c.alpha;
  j["level"] = c.level;
  j["c_max"] = c.c_max;
  return j;
}

ContractionFn contraction_from_json(const Json& j) {
  const Json& kind = require(j, "kind");
  if (!kind.is_string()) throw ValidationError("field 'kind' must be a string");
  const auto name = kind.get<std::string>();
  const double c_max = j.contains("c_max") ? number(j, "c_max") : 0.9;
  if (name == "example-sqrt") return ContractionFn::example_sqrt();
  if (name == "quadratic-clamped") return ContractionFn::quadratic_clamped(number(j, "alpha"), c_max);
  if (name == "constant") return ContractionFn::constant(number(j, "level"));
  throw ValidationError("unknown contraction kind '" + name + "'");
}

Json to_json(const TrainConfig& config) {
  Json j;
  j["lambda"] = config.lambda;
  j["ess_weight"] = config.ess_weight;
  j["learning_rate"] = config.learning_rate;
  j["beta1"] = config.beta1;
  j["beta2"] = config.beta2;
  j["epsilon"] = config.epsilon;
  j["epochs"] = config.epochs;
  j["hidden_dim"] = config.hidden_dim;
  j["contraction"] = to_json(config.contraction);
  j["metric"] = config.metric ? to_json(config.metric->matrix()) : Json(nullptr);
  j["theta_good_override"] = config.theta_good_override ? to_json(*config.theta_good_override) : Json(nullptr);
  return j;
}

TrainConfig train_config_from_json(const Json& j) {
  TrainConfig c;
  c.lambda = number(j, "lambda");
  c.ess_weight = number(j, "ess_weight");
  c.learning_rate = number(j, "learning_rate");
  c.beta1 = number(j, "beta1");
  c.beta2 = number(j, "beta2");
  c.epsilon = number(j, "epsilon");
  c.epochs = count(j, "epochs");
  c.hidden_dim = count(j, "hidden_dim");
  c.contraction = contraction_from_json(require(j, "contraction"));
  if (j.contains("metric") && !j["metric"].is_null()) {
    c.metric = SymmetricMatrix(matrix_from_json(j["metric"], "metric"));
  }
  if (j.contains("theta_good_override") && !j["theta_good_override"].is_null()) {
    c.theta_good_override = vector_from_json(j["theta_good_override"], "theta_good_override");
  }
  c.validate();
  return c;
}

Json to_json(const PcaTransform& pca) {
  Json j;
  j["means"] = to_json(pca.means);
  j["scales"] = to_json(pca.scales);
  j["projection"] = to_json(pca.projection);
  j["explained_ratio"] = to_json(pca.explained_ratio);
  j["zero_variance"] = pca.zero_variance;
  j["standardized"] = pca.standardized;
  return j;
}

PcaTransform pca_from_json(const Json& j) {
  PcaTransform p;
  p.means = vector_from_json(require(j, "means"), "means");
  p.scales = vector_from_json(require(j, "scales"), "scales");
  p.projection = matrix_from_json(require(j, "projection"), "projection");
  p.explained_ratio = vector_from_json(require(j, "explained_ratio"), "explained_ratio");
  p.zero_variance = require(j, "zero_variance").get<std::vector<bool>>();
  p.standardized = require(j, "standardized").get<bool>();
  const std::size_t d = p.projection.rows();
  if (p.means.dim() != d || p.scales.dim() != d || p.zero_variance.size() != d ||
      p.explained_ratio.dim() != p.projection.cols()) {
    throw ValidationError("pca: inconsistent shapes");
  }
  for (double s : p.scales)
    if (!(s > 0.0)) throw ValidationError("pca: scales must be positive");
  return p;
}

Json to_json(const FilterParams& params) {
  Json j;
  j["hidden"] = params.hidden();
  j["features"] = params.features();
  j["values"] = params.flat();
  return j;
}

FilterParams filter_params_from_json(const Json& j) {
  return FilterParams(count(j, "hidden"), count(j, "features"), vector_from_json(require(j, "values"), "values").values());
}

}  // namespace mcf
