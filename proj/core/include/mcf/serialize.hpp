// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include "mcf/contraction.hpp"
#include "mcf/linalg.hpp"
#include "mcf/mlp.hpp"
#include "mcf/pca.hpp"

namespace mcf {

using Json = nlohmann::ordered_json;

Json to_json(const Vector& v);
Vector vector_from_json(const Json& j, std::string_view field);

Json to_json(const Matrix& m);  // {"rows", "cols", "values" (row-major)}
Matrix matrix_from_json(const Json& j, std::string_view field);

Json to_json(const ContractionFn& c);
ContractionFn contraction_from_json(const Json& j);

Json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const Json& j);

Json to_json(const PcaTransform& pca);
PcaTransform pca_from_json(const Json& j);

Json to_json(const FilterParams& params);
FilterParams filter_params_from_json(const Json& j);

}  // namespace mcf
