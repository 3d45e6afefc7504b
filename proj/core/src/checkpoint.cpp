// Copyright 2026 The mcf Authors
// SPDX-License-Identifier: Apache-2.0
#include "mcf/checkpoint.hpp"

#include <string>

#include "mcf/errors.hpp"
#include "mcf/io.hpp"
#include "mcf/serialize.hpp"

namespace mcf {

std::string train_config_hash(const TrainConfig& config) { return git_blob_sha1(to_json(config).dump()); }

std::string serialize_checkpoint(const FilterCheckpoint& ckpt) {
  if (ckpt.params.features() != ckpt.pca.k()) throw ValidationError("checkpoint: network and PCA shapes differ");
  Json j;
  j["format"] = "mcf-filter-checkpoint";
  j["version"] = kCheckpointVersion;
  j["config_hash"] = train_config_hash(ckpt.config);
  j["config"] = to_json(ckpt.config);
  j["pca"] = to_json(ckpt.pca);
  j["params"] = to_json(ckpt.params);
  return j.dump(2) + "\n";
}

FilterCheckpoint parse_checkpoint(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("checkpoint: malformed JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "mcf-filter-checkpoint") {
    throw ValidationError("checkpoint: not a filter checkpoint");
  }
  if (j.value("version", -1) != kCheckpointVersion) {
    throw ValidationError("checkpoint: unsupported version " + j.value("version", Json(nullptr)).dump());
  }
  FilterCheckpoint c;
  try {
    c.config = train_config_from_json(j.at("config"));
    c.pca = pca_from_json(j.at("pca"));
    c.params = filter_params_from_json(j.at("params"));
    c.config_hash = j.at("config_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("checkpoint: ") + e.what());
  }
  if (c.params.features() != c.pca.k()) {
    throw ValidationError("checkpoint: network expects " + std::to_string(c.params.features()) +
                          " features but the PCA produces " + std::to_string(c.pca.k()));
  }
  if (c.params.hidden() != c.config.hidden_dim) {
    throw ValidationError("checkpoint: hidden width " + std::to_string(c.params.hidden()) +
                          " does not match the config's hidden_dim " + std::to_string(c.config.hidden_dim));
  }
  if (c.config_hash != train_config_hash(c.config)) throw ValidationError("checkpoint: config hash mismatch");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const FilterCheckpoint& ckpt) {
  write_file_atomic(path, serialize_checkpoint(ckpt));
}

FilterCheckpoint load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_file(path)); }

}  // namespace mcf
