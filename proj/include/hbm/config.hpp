#pragma once

// Run configuration: one JSON document with model, schedule and io sections.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "hbm/stats.hpp"

namespace hbm {

struct RunConfig {
  Hyperparameters hyper;
  std::filesystem::path input;
  std::filesystem::path output_dir;

  // Unknown keys, wrong types and bound violations raise ConfigError with the
  // dotted field name.
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace hbm
