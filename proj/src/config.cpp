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

#include "persona/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "persona/errors.hpp"

namespace persona {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

std::size_t parse_size(std::string_view key, std::string_view v) {
  return static_cast<std::size_t>(parse_uint(key, v));
}

struct Entry {
  const char* name;
  const char* help;
  std::function<void(RunConfig&, std::string_view, const std::filesystem::path&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define SIZE_FIELD(key, field, help)                                                               \
  Entry {                                                                                          \
    key, help, [](RunConfig& c, std::string_view v, const auto&) { c.field = parse_size(key, v); }, \
        [](const RunConfig& c) { return std::to_string(c.field); }                                 \
  }
#define DOUBLE_FIELD(key, field, help)                                                               \
  Entry {                                                                                            \
    key, help, [](RunConfig& c, std::string_view v, const auto&) { c.field = parse_double(key, v); }, \
        [](const RunConfig& c) { return format_double(c.field); }                                    \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      SIZE_FIELD("model.d_model", model.d_model, "encoder width"),
      SIZE_FIELD("model.d_ff", model.d_ff, "feed-forward inner width"),
      SIZE_FIELD("model.n_heads", model.n_heads, "attention heads"),
      SIZE_FIELD("model.audio_blocks", model.audio_blocks, "audio encoder depth"),
      SIZE_FIELD("model.text_blocks", model.text_blocks, "text encoder depth"),
      SIZE_FIELD("model.visual_blocks", model.visual_blocks, "visual encoder depth"),
      SIZE_FIELD("model.multimodal_blocks", model.multimodal_blocks, "fusion encoder depth"),
      DOUBLE_FIELD("model.dropout", model.dropout, "dropout rate in [0, 1)"),
      Entry{"model.modalities", "comma list of audio, text, visual",
            [](RunConfig& c, std::string_view v, const auto&) { c.model.modalities = ModalitySet::parse(v); },
            [](const RunConfig& c) { return c.model.modalities.str(); }},
      Entry{"model.heads", "joint, bigfive or hexaco",
            [](RunConfig& c, std::string_view v, const auto&) { c.model.heads = HeadSet::parse(v); },
            [](const RunConfig& c) { return c.model.heads.str(); }},
      SIZE_FIELD("model.vocab_size", model.vocab_size, "text vocabulary size"),
      SIZE_FIELD("model.d_visual_in", model.d_visual_in, "visual feature width"),
      SIZE_FIELD("model.d_audio_in", model.d_audio_in, "audio feature width"),
      Entry{"model.seed", "weight initialisation seed",
            [](RunConfig& c, std::string_view v, const auto&) { c.model.seed = parse_uint("model.seed", v); },
            [](const RunConfig& c) { return std::to_string(c.model.seed); }},

      SIZE_FIELD("train.batch_size", train.batch_size, "samples per update"),
      DOUBLE_FIELD("train.learning_rate", train.optimizer.learning_rate, "RAdam step size"),
      DOUBLE_FIELD("train.beta1", train.optimizer.beta1, "RAdam first-moment decay"),
      DOUBLE_FIELD("train.beta2", train.optimizer.beta2, "RAdam second-moment decay"),
      DOUBLE_FIELD("train.eps", train.optimizer.eps, "RAdam denominator epsilon"),
      SIZE_FIELD("train.max_epochs", train.max_epochs, "epoch limit"),
      SIZE_FIELD("train.patience", train.patience, "early-stopping patience in epochs"),
      DOUBLE_FIELD("train.weight_bigfive", train.loss_weights.bigfive, "Big Five loss weight"),
      DOUBLE_FIELD("train.weight_hexaco", train.loss_weights.hexaco, "HEXACO loss weight"),
      DOUBLE_FIELD("train.max_grad_norm", train.max_grad_norm, "gradient clipping norm, 0 disables"),
      Entry{"train.seed", "batch order and dropout seed",
            [](RunConfig& c, std::string_view v, const auto&) { c.train.seed = parse_uint("train.seed", v); },
            [](const RunConfig& c) { return std::to_string(c.train.seed); }},

      SIZE_FIELD("data.persons", data.persons, "number of synthetic persons"),
      SIZE_FIELD("data.videos_per_person", data.videos_per_person, "videos per person"),
      DOUBLE_FIELD("data.train_fraction", data.train_fraction, "share of persons in train"),
      DOUBLE_FIELD("data.val_fraction", data.val_fraction, "share of persons in val"),
      DOUBLE_FIELD("data.test_fraction", data.test_fraction, "share of persons in test"),
      DOUBLE_FIELD("data.audio_noise", data.audio_noise, "audio frame noise std"),
      DOUBLE_FIELD("data.visual_noise", data.visual_noise, "visual frame noise std"),
      DOUBLE_FIELD("data.text_noise", data.text_noise, "text score noise std"),
      DOUBLE_FIELD("data.drift", data.drift, "slow drift amplitude"),
      DOUBLE_FIELD("data.jitter", data.jitter, "per-video trait jitter std"),
      SIZE_FIELD("data.audio_min_frames", data.audio_length.min, "shortest audio sequence"),
      SIZE_FIELD("data.audio_max_frames", data.audio_length.max, "longest audio sequence"),
      SIZE_FIELD("data.visual_min_frames", data.visual_length.min, "shortest visual sequence"),
      SIZE_FIELD("data.visual_max_frames", data.visual_length.max, "longest visual sequence"),
      SIZE_FIELD("data.text_min_tokens", data.text_length.min, "shortest transcript"),
      SIZE_FIELD("data.text_max_tokens", data.text_length.max, "longest transcript"),
      SIZE_FIELD("data.vocab_size", data.vocab_size, "token vocabulary"),
      SIZE_FIELD("data.audio_dim", data.audio_dim, "audio feature width"),
      SIZE_FIELD("data.visual_dim", data.visual_dim, "visual feature width"),
      Entry{"data.modalities", "modalities to render",
            [](RunConfig& c, std::string_view v, const auto&) { c.data.modalities = ModalitySet::parse(v); },
            [](const RunConfig& c) { return c.data.modalities.str(); }},
      Entry{"data.target_correlation", "11x11 CSV of label correlations; empty for the built-in target",
            [](RunConfig& c, std::string_view v, const std::filesystem::path& base) {
              if (v.empty()) {
                c.target_path.clear();
                c.data.target.resize(0, 0);
                return;
              }
              std::filesystem::path p(v);
              if (p.is_relative() && !base.empty()) p = base / p;
              c.data.target = read_matrix_csv(p);
              c.target_path = p.string();
            },
            [](const RunConfig& c) { return c.target_path; }},
      Entry{"data.seed", "generator seed",
            [](RunConfig& c, std::string_view v, const auto&) { c.data.seed = parse_uint("data.seed", v); },
            [](const RunConfig& c) { return std::to_string(c.data.seed); }},

      Entry{"run.out_dir", "output directory",
            [](RunConfig& c, std::string_view v, const auto&) { c.out_dir = std::string(v); },
            [](const RunConfig& c) { return c.out_dir; }},
      Entry{"run.seed", "sets model.seed, train.seed and data.seed",
            [](RunConfig& c, std::string_view v, const auto&) { c.set_seed(parse_uint("run.seed", v)); },
            [](const RunConfig& c) { return std::to_string(c.train.seed); }},
  };
  return table;
}

#undef SIZE_FIELD
#undef DOUBLE_FIELD

const Entry& find_entry(std::string_view key) {
  for (const auto& e : entries())
    if (key == e.name) return e;
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  data.validate();
  if (out_dir.empty()) throw ConfigError("run.out_dir must not be empty");
}

void RunConfig::set_seed(std::uint64_t seed) {
  model.seed = seed;
  train.seed = seed;
  data.seed = seed;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& e : entries()) out.push_back({e.name, e.help});
    return out;
  }();
  return keys;
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value,
                   const std::filesystem::path& base) {
  find_entry(trim(key)).set(cfg, trim(value), base);
}

RunConfig parse_config(std::istream& in, std::string_view source, const std::filesystem::path& base) {
  std::vector<std::pair<std::string, std::string>> lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto body = trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(source) + ":" + std::to_string(lineno) + ": expected key = value");
    }
    lines.emplace_back(std::string(trim(body.substr(0, eq))), std::string(trim(body.substr(eq + 1))));
  }
  RunConfig cfg;
  std::stable_partition(lines.begin(), lines.end(), [](const auto& kv) { return kv.first == "run.seed"; });
  for (const auto& [k, v] : lines) {
    try {
      apply_setting(cfg, k, v, base);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(source) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  return parse_config(is, path.string(), path.parent_path());
}

std::string config_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& e : entries()) {
    if (std::string_view(e.name) == "run.seed") continue;  // implied by the section seeds
    out += e.name;
    out += " = ";
    out += e.get(cfg);
    out += '\n';
  }
  return out;
}

std::string model_config_text(const ModelConfig& model) {
  RunConfig cfg;
  cfg.model = model;
  std::string out;
  for (const auto& e : entries()) {
    if (std::string_view(e.name).rfind("model.", 0) != 0) continue;
    out += std::string(e.name) + "=" + e.get(cfg) + "\n";
  }
  return out;
}

ModelConfig model_config_from_text(std::string_view text) {
  std::istringstream is{std::string(text)};
  RunConfig cfg;
  std::string line;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("malformed model config line '" + line + "'");
    auto key = trim(std::string_view(line).substr(0, eq));
    if (key.rfind("model.", 0) != 0) throw ParseError("unexpected key '" + std::string(key) + "' in model config");
    apply_setting(cfg, key, std::string_view(line).substr(eq + 1));
  }
  cfg.model.validate();
  return cfg.model;
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open matrix " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(parse_double(path.string(), trim(cell)));
    rows.push_back(std::move(row));
  }
  const auto n = rows.size();
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw ConfigError(path.string() + ": matrix is not square");
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

}  // namespace persona
