// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mcf/mlp.hpp"
#include "mcf/pca.hpp"

namespace mcf {

inline constexpr int kCheckpointVersion = 1;

/// Trained filter with its feature map and the configuration that produced it.
struct FilterCheckpoint {
  PcaTransform pca;
  FilterParams params;
  TrainConfig config;
  std::string config_hash;  // git_blob_sha1 of the serialized config; filled by serialize_checkpoint
};

/// Content hash of a training configuration.
std::string train_config_hash(const TrainConfig& config);

/// JSON text. The stored config hash is recomputed from `config`.
std::string serialize_checkpoint(const FilterCheckpoint& ckpt);

/// Throws ValidationError on a version, shape or hash mismatch.
FilterCheckpoint parse_checkpoint(std::string_view text);

void save_checkpoint(const std::filesystem::path& path, const FilterCheckpoint& ckpt);
FilterCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mcf
