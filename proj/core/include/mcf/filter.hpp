// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "mcf/expfam.hpp"
#include "mcf/mlp.hpp"
#include "mcf/pca.hpp"

namespace mcf {

/// Selection rule applied to each round's candidates in the filtered workflow.
class FilterHandle {
 public:
  enum class Kind { kAllOnes, kOracle, kMlp, kCustom };
  using WeightFn = std::function<Vector(const ExpFamilyModel&, const Dataset&)>;

  static FilterHandle all_ones();
  /// Analytic pullback toward theta_good with pull factor γ ∈ (0, 1].
  static FilterHandle oracle(double gamma, Parameter theta_good);
  static FilterHandle mlp(FilterParams params, PcaTransform pca);
  static FilterHandle custom(WeightFn fn, std::optional<std::size_t> input_dim = std::nullopt);

  Kind kind() const noexcept { return kind_; }
  double gamma() const noexcept { return gamma_; }

  /// Throws ValidationError unless the filter accepts points of this dimension.
  void check_input_dim(std::size_t dim) const;

  /// One weight in [0, 1] per candidate.
  Vector weights(const ExpFamilyModel& model, const Dataset& candidates) const;

 private:
  FilterHandle() = default;

  Kind kind_ = Kind::kAllOnes;
  double gamma_ = 0.0;
  std::optional<Parameter> theta_good_;
  std::shared_ptr<const FilterParams> params_;
  std::shared_ptr<const PcaTransform> pca_;
  WeightFn fn_;
  std::optional<std::size_t> input_dim_;
};

std::string_view filter_kind_name(FilterHandle::Kind kind) noexcept;

}  // namespace mcf
