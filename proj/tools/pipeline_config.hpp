#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "gpkmd/embedding.hpp"
#include "gpkmd/montecarlo.hpp"

namespace gpkmd::cli {

/// Initial kick applied to one generator on top of the equilibrium.
struct Disturbance {
  int generator = 0;  // machine label
  double delta = 0.0;  // rad added to the rotor angle
  double omega = 0.0;  // rad/s speed deviation
};

/// Everything a command needs. Paths are absolute once loaded.
struct PipelineConfig {
  std::optional<std::filesystem::path> grid;
  std::optional<std::filesystem::path> series;
  std::optional<Disturbance> disturbance;
  double rate_hz = 15.0;
  double window_s = 4.0;
  int embedding_order = kDefaultEmbeddingOrder;
  HyperSettings hyper;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  int trials = 100;
  int track_modes = 2;
  std::optional<std::string> reference_task;  // task label; defaults to the last task
  bool reselect_per_trial = false;
  bool plots = true;
  unsigned workers = 0;
  std::filesystem::path out = "out";

  double sample_period() const { return 1.0 / rate_hz; }
};

/// Reads a JSON config. Relative paths resolve against `base_dir`.
/// Throws ConfigError on unknown keys, wrong types or bad ranges.
PipelineConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

/// Range and file-existence checks. Throws ConfigError.
void validate(const PipelineConfig& cfg);

/// The resolved configuration, loadable by parse_config.
nlohmann::json to_json(const PipelineConfig& cfg);

}  // namespace gpkmd::cli
