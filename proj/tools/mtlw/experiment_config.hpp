#pragma once

#include <cstdint>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "mtlw/data/synthetic.hpp"
#include "mtlw/net/multi_exit_net.hpp"
#include "mtlw/train/trainer.hpp"

namespace mtlw::tools {

/// One experiment document. The top-level seed drives data generation,
/// weight init and batch order; the per-module seed fields are not exposed.
/// Relative paths resolve against the working directory and are echoed back
/// as absolute paths.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::filesystem::path data_dir = "data";
  std::filesystem::path out_dir = "runs/default";
  data::GenConfig generator;
  net::NetConfig net;  // input geometry is taken from the data and crop width
  train::TrainConfig train;

  // Seeds every sub-config and validates the whole document.
  void finalize();
  std::filesystem::path manifest_path() const { return data_dir / "manifest.csv"; }
  // Net config with input geometry derived from the feature height and crop.
  net::NetConfig net_for(std::size_t feature_height) const;
};

// Throws ConfigError ("section.key: ...") on unknown keys, wrong types or
// invalid values.
ExperimentConfig config_from_json(const nlohmann::json& doc);
// Parses the file without interpreting it (so callers can apply overrides).
nlohmann::json read_config_document(const std::filesystem::path& path);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);
void write_config(const std::filesystem::path& path, const ExperimentConfig& config);

}  // namespace mtlw::tools
