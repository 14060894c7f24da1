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

#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "persona/commands.hpp"
#include "persona/errors.hpp"

namespace {

using namespace persona;
namespace fs = std::filesystem;

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "key=value config file (default: $PERSONA_CONFIG)");
  cmd->add_option("--set", c.overrides, "override one setting, e.g. --set train.max_epochs=20");
  cmd->add_option("--seed", c.seed, "sets model, train and data seeds");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg;
  std::string path = c.config;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnv)) path = env;
  }
  if (!path.empty()) cfg = load_config(path);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1), fs::current_path());
  }
  if (c.seed) cfg.set_seed(*c.seed);
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint Big Five and HEXACO apparent-personality models"};
  app.require_subcommand(1);

  Common common;
  std::string out, manifest, annotations, inventory, split = "test", heads, modalities, size = "tiny";
  std::vector<std::string> checkpoints;
  bool corrupt = false, show_keys = false;

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic multimodal dataset");
  add_common(gen, common);
  gen->add_option("-o,--out", out, "output directory (default: run.out_dir)");

  auto* score = app.add_subcommand("score", "score questionnaire annotations into normalised traits");
  add_common(score, common);
  score->add_option("annotations", annotations, "CSV: observer_id,video_id,item_id,response")->required();
  score->add_option("-i,--inventory", inventory, "inventory JSON")->required();
  score->add_option("-o,--out", out, "output CSV")->required();

  auto* train = app.add_subcommand("train", "train a joint or task-specific model");
  add_common(train, common);
  train->add_option("-m,--manifest", manifest, "dataset manifest.jsonl")->required();
  train->add_option("-o,--out", out, "output directory (default: run.out_dir)");
  train->add_option("--heads", heads, "joint, bigfive or hexaco");
  train->add_option("--modalities", modalities, "comma list of audio, text, visual");

  auto* eval = app.add_subcommand("evaluate", "per-trait correlation and accuracy of a checkpoint");
  add_common(eval, common);
  eval->add_option("checkpoint", checkpoints, "checkpoint.tfck")->required()->expected(1);
  eval->add_option("-m,--manifest", manifest, "dataset manifest.jsonl")->required();
  eval->add_option("--split", split, "train, val or test");
  eval->add_option("-o,--out", out, "output directory (default: run.out_dir)");

  auto* corr = app.add_subcommand("correlate", "Big Five x HEXACO correlation of predicted traits");
  add_common(corr, common);
  corr->add_option("checkpoints", checkpoints, "one joint checkpoint, or a Big Five and a HEXACO one")
      ->required()
      ->expected(1, 2);
  corr->add_option("-m,--manifest", manifest, "dataset manifest.jsonl")->required();
  corr->add_option("--split", split, "train, val or test");
  corr->add_option("-o,--out", out, "output CSV (default: <run.out_dir>/cross_correlation.csv)");

  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of every parameter group");
  add_common(grad, common);
  grad->add_option("--size", size, "tiny or config")->check(CLI::IsMember({"tiny", "config"}));
  grad->add_flag("--corrupt-backward", corrupt, "negative control: use a wrong gradient")->group("");

  auto* keys = app.add_subcommand("config", "print the effective configuration");
  add_common(keys, common);
  keys->add_flag("--keys", show_keys, "list accepted keys instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfigError;
  }

  try {
    const RunConfig cfg = resolve(common);
    const fs::path out_dir = out.empty() ? fs::path(cfg.out_dir) : fs::path(out);

    if (gen->parsed()) {
      cli::gen_data(cfg, out_dir, std::cout);
    } else if (score->parsed()) {
      cli::score(annotations, inventory, out, std::cout);
    } else if (train->parsed()) {
      RunConfig c = cfg;
      if (!heads.empty()) c.model.heads = HeadSet::parse(heads);
      if (!modalities.empty()) c.model.modalities = ModalitySet::parse(modalities);
      cli::train(c, manifest, out_dir, std::cout);
    } else if (eval->parsed()) {
      cli::evaluate(checkpoints.front(), manifest, parse_split(split), out_dir, std::cout);
    } else if (corr->parsed()) {
      const fs::path target = out.empty() ? fs::path(cfg.out_dir) / "cross_correlation.csv" : fs::path(out);
      std::vector<fs::path> paths(checkpoints.begin(), checkpoints.end());
      cli::correlate(paths, manifest, parse_split(split), target, std::cout);
    } else if (grad->parsed()) {
      const ModelConfig mc = size == "tiny" ? ModelConfig::tiny() : cfg.model;
      const auto r = cli::gradcheck(mc, cfg.model.seed, std::cout, corrupt);
      return r.passed ? cli::kOk : cli::kCheckFailed;
    } else if (keys->parsed()) {
      if (show_keys) {
        for (const auto& k : config_keys()) std::cout << k.name << "\t" << k.help << "\n";
      } else {
        std::cout << config_text(cfg);
      }
    }
    return cli::kOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::exit_code_for(e);
  }
}
