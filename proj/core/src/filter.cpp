// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#include "mcf/filter.hpp"

#include <string>

#include "mcf/errors.hpp"
#include "mcf/oracle.hpp"

namespace mcf {

FilterHandle FilterHandle::all_ones() { return FilterHandle(); }

FilterHandle FilterHandle::oracle(double gamma, Parameter theta_good) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("oracle filter: gamma must be in (0, 1]");
  FilterHandle h;
  h.kind_ = Kind::kOracle;
  h.gamma_ = gamma;
  h.input_dim_ = theta_good.dim();
  h.theta_good_ = std::move(theta_good);
  return h;
}

FilterHandle FilterHandle::mlp(FilterParams params, PcaTransform pca) {
  if (params.features() != pca.k()) {
    throw ValidationError("mlp filter: network expects " + std::to_string(params.features()) +
                          " features but the PCA produces " + std::to_string(pca.k()));
  }
  FilterHandle h;
  h.kind_ = Kind::kMlp;
  h.input_dim_ = pca.input_dim();
  h.params_ = std::make_shared<const FilterParams>(std::move(params));
  h.pca_ = std::make_shared<const PcaTransform>(std::move(pca));
  return h;
}

FilterHandle FilterHandle::custom(WeightFn fn, std::optional<std::size_t> input_dim) {
  if (!fn) throw ValidationError("custom filter: empty weight function");
  FilterHandle h;
  h.kind_ = Kind::kCustom;
  h.fn_ = std::move(fn);
  h.input_dim_ = input_dim;
  return h;
}

void FilterHandle::check_input_dim(std::size_t dim) const {
  if (input_dim_ && *input_dim_ != dim) {
    throw ValidationError(std::string(filter_kind_name(kind_)) + " filter expects dimension " +
                          std::to_string(*input_dim_) + ", model has " + std::to_string(dim));
  }
}

Vector FilterHandle::weights(const ExpFamilyModel& model, const Dataset& candidates) const {
  check_input_dim(model.dim());
  switch (kind_) {
    case Kind::kAllOnes: return Vector(candidates.size(), 1.0);
    case Kind::kOracle: return oracle_pullback_weights(model, candidates, *theta_good_, gamma_).weights;
    case Kind::kMlp: {
      Vector w(candidates.size());
      for (std::size_t i = 0; i < candidates.size(); ++i) w[i] = forward(*params_, pca_->transform(candidates[i]));
      return w;
    }
    case Kind::kCustom: {
      Vector w = fn_(model, candidates);
      if (w.dim() != candidates.size()) throw ValidationError("custom filter: wrong number of weights");
      return w;
    }
  }
  throw ValidationError("unknown filter kind");
}

std::string_view filter_kind_name(FilterHandle::Kind kind) noexcept {
  switch (kind) {
    case FilterHandle::Kind::kAllOnes: return "all-ones";
    case FilterHandle::Kind::kOracle: return "oracle";
    case FilterHandle::Kind::kMlp: return "mlp";
    case FilterHandle::Kind::kCustom: return "custom";
  }
  return "unknown";
}

}  // namespace mcf
