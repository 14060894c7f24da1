/*
 * Copyright 2026 The Persona Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PERSONA_CONFIG_HPP
#define PERSONA_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "persona/model.hpp"
#include "persona/synthdata.hpp"
#include "persona/training.hpp"

namespace persona {

/// Environment variable naming the config file used when none is given.
inline constexpr const char* kConfigEnv = "PERSONA_CONFIG";

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  GeneratorConfig data;
  std::string out_dir = "out";
  // Where data.target_correlation was given; empty if the default is used.
  std::string target_path;

  void validate() const;
  /// Sets model.seed, train.seed and data.seed.
  void set_seed(std::uint64_t seed);
};

struct ConfigKey {
  std::string name;
  std::string help;
};

/// Every accepted key with a one-line description.
const std::vector<ConfigKey>& config_keys();

/// Applies one key=value setting. Relative paths are resolved against
/// `base`. Throws ConfigError for unknown keys or malformed values.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value,
                   const std::filesystem::path& base = {});

/// Parses "key = value" lines; '#' starts a comment. A run.seed line is
/// applied before the other lines so that section seeds can override it.
RunConfig parse_config(std::istream& in, std::string_view source = "config",
                       const std::filesystem::path& base = {});
RunConfig load_config(const std::filesystem::path& path);

/// Every key with its current value, one per line, in config_keys() order.
std::string config_text(const RunConfig& cfg);

/// The model.* subset, used inside checkpoints.
std::string model_config_text(const ModelConfig& cfg);
ModelConfig model_config_from_text(std::string_view text);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

/// Reads a square matrix from comma-separated rows.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

}  // namespace persona

#endif  // PERSONA_CONFIG_HPP
