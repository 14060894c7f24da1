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

#include "persona/commands.hpp"

#include <cstdio>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "persona/errors.hpp"
#include "persona/gradcheck.hpp"
#include "persona/synthdata.hpp"

namespace persona::cli {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  return os;
}

std::string matrix_text(const CrossMatrix& m) {
  std::string out = "     ";
  char buf[32];
  for (auto k : kHexacoKeys) {
    std::snprintf(buf, sizeof buf, "%7s", std::string(k).c_str());
    out += buf;
  }
  out += "\n";
  for (std::size_t i = 0; i < kBigFiveTraits; ++i) {
    std::snprintf(buf, sizeof buf, "%-5s", std::string(kBigFiveKeys[i]).c_str());
    out += buf;
    for (std::size_t j = 0; j < kHexacoTraits; ++j) {
      std::snprintf(buf, sizeof buf, "%7.3f", m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

nlohmann::ordered_json head_json(const HeadReport& h) {
  nlohmann::ordered_json j;
  j["corr"] = h.correlation;
  j["acc"] = h.accuracy;
  j["mae"] = h.mae;
  return j;
}

std::vector<Sample> load_split(const fs::path& manifest, Split split, ModalitySet modalities) {
  const auto all = load_dataset(manifest);
  auto chosen = select_split(all, split);
  if (chosen.empty()) {
    throw ConfigError(manifest.string() + " has no " + std::string(split_name(split)) + " samples");
  }
  return restrict_modalities(chosen, modalities);
}

// Identity forward whose backward reports three times the true gradient.
Tensor corrupted(const Tensor& x) {
  std::vector<double> v(x.data().begin(), x.data().end());
  auto* xn = x.node().get();
  return make_result("corrupted", x.shape(), std::move(v), {x}, [xn](const detail::Node& out) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t i = 0; i < out.grad.size(); ++i) xn->grad[i] += 3.0 * out.grad[i];
  });
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return kIoError;
  if (dynamic_cast<const NumericError*>(&e)) return kNumericError;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const CompletenessError*>(&e) || dynamic_cast<const RangeError*>(&e) ||
      dynamic_cast<const ShapeError*>(&e)) {
    return kConfigError;
  }
  return kCheckFailed;
}

GenDataResult gen_data(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  cfg.data.validate();
  const auto samples = generate_dataset(cfg.data);
  write_dataset(out, samples);

  GenDataResult r;
  Eigen::MatrixXd labels(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(kAllTraits));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    ++r.split_counts[static_cast<std::size_t>(s.split)];
    const auto row = static_cast<Eigen::Index>(i);
    for (std::size_t k = 0; k < kBigFiveTraits; ++k) labels(row, static_cast<Eigen::Index>(k)) = s.bigfive[k];
    for (std::size_t k = 0; k < kHexacoTraits; ++k) {
      labels(row, static_cast<Eigen::Index>(kBigFiveTraits + k)) = s.hexaco[k];
    }
  }
  r.empirical = empirical_cross_block(labels);

  log << "wrote " << samples.size() << " samples to " << out.string() << "\n";
  log << "train " << r.split_counts[0] << "  val " << r.split_counts[1] << "  test " << r.split_counts[2] << "\n";
  log << "label cross-correlation (rows Big Five, columns HEXACO):\n" << matrix_text(r.empirical);
  return r;
}

std::vector<scoring::VideoScores> score(const fs::path& annotations, const fs::path& inventory,
                                        const fs::path& out_csv, std::ostream& log) {
  const auto inv = scoring::Inventory::load(inventory);
  const auto rows = scoring::read_annotations(annotations);
  auto videos = scoring::score_annotations(rows, inv);

  std::string text = "video_id";
  for (const auto& t : inv.traits) text += "," + t;
  text += "\n";
  for (const auto& v : videos) {
    text += v.video_id;
    for (double x : v.scores.values) text += "," + format_double(x);
    text += "\n";
  }
  auto os = open_out(out_csv);
  os << text;
  if (!os) throw IoError("failed writing " + out_csv.string());
  log << "scored " << videos.size() << " videos with " << inv.name << " -> " << out_csv.string() << "\n";
  return videos;
}

TrainResult train(const RunConfig& cfg, const fs::path& manifest, const fs::path& out_dir, std::ostream& log) {
  cfg.model.validate();
  cfg.train.validate();
  const auto all = load_dataset(manifest);
  auto train_set = select_split(all, Split::train);
  auto val_set = select_split(all, Split::val);
  if (train_set.empty() || val_set.empty()) {
    throw ConfigError(manifest.string() + " needs non-empty train and val splits");
  }
  train_set = restrict_modalities(train_set, cfg.model.modalities);
  val_set = restrict_modalities(val_set, cfg.model.modalities);

  ensure_dir(out_dir);
  auto log_os = open_out(out_dir / "train_log.jsonl");
  JointModel model(cfg.model);
  log << "training " << cfg.model.heads.str() << " model on {" << cfg.model.modalities.str() << "}: "
      << train_set.size() << " train, " << val_set.size() << " val samples\n";

  TrainResult r;
  r.state = fit(model, train_set, val_set, cfg.train, [&](const EpochRecord& e) {
    nlohmann::ordered_json j;
    j["epoch"] = e.epoch;
    j["train_loss"] = e.train_loss;
    j["val_loss"] = e.val_loss;
    j["train_bigfive_mae"] = e.train_heads.bigfive;
    j["train_hexaco_mae"] = e.train_heads.hexaco;
    j["val_bigfive_mae"] = e.val_heads.bigfive;
    j["val_hexaco_mae"] = e.val_heads.hexaco;
    log_os << j.dump() << "\n";
    char line[128];
    std::snprintf(line, sizeof line, "epoch %4zu  train %.5f  val %.5f\n", e.epoch, e.train_loss, e.val_loss);
    log << line;
  });

  r.final_train = evaluate_model(model, train_set);
  nlohmann::ordered_json fin;
  fin["final"] = true;
  fin["best_epoch"] = r.state.best_epoch;
  fin["best_val_loss"] = r.state.best_val_loss;
  fin["steps"] = r.state.steps;
  fin["split"] = "train";
  fin["samples"] = r.final_train.samples;
  if (r.final_train.bigfive) fin["bigfive"] = head_json(*r.final_train.bigfive);
  if (r.final_train.hexaco) fin["hexaco"] = head_json(*r.final_train.hexaco);
  log_os << fin.dump() << "\n";
  if (!log_os) throw IoError("failed writing train log");

  save_checkpoint(model, out_dir / "checkpoint.tfck");
  log << "best epoch " << r.state.best_epoch << ", val loss " << format_double(r.state.best_val_loss)
      << "; checkpoint written to " << (out_dir / "checkpoint.tfck").string() << "\n";
  return r;
}

EvalReport evaluate(const fs::path& checkpoint, const fs::path& manifest, Split split, const fs::path& out_dir,
                    std::ostream& log) {
  const auto model = load_checkpoint(checkpoint);
  const auto samples = load_split(manifest, split, model.config().modalities);
  const auto report = evaluate_model(model, samples);
  ensure_dir(out_dir);
  {
    auto os = open_out(out_dir / "report.csv");
    os << report_csv(report);
  }
  const auto text = report_text(report);
  {
    auto os = open_out(out_dir / "report.txt");
    os << text;
  }
  log << text;
  return report;
}

CrossMatrix correlate(const std::vector<fs::path>& checkpoints, const fs::path& manifest, Split split,
                      const fs::path& out_csv, std::ostream& log) {
  if (checkpoints.empty() || checkpoints.size() > 2) {
    throw ConfigError("correlate takes one joint checkpoint or one per inventory");
  }
  std::optional<std::vector<BigFive>> bigfive;
  std::optional<std::vector<Hexaco>> hexaco;
  for (const auto& path : checkpoints) {
    const auto model = load_checkpoint(path);
    const auto samples = load_split(manifest, split, model.config().modalities);
    const auto preds = predict_all(model, samples);
    if (model.config().heads.bigfive) {
      if (bigfive) throw ConfigError("more than one checkpoint predicts Big Five");
      bigfive.emplace();
      for (const auto& p : preds) bigfive->push_back(*p.bigfive);
    }
    if (model.config().heads.hexaco) {
      if (hexaco) throw ConfigError("more than one checkpoint predicts HEXACO");
      hexaco.emplace();
      for (const auto& p : preds) hexaco->push_back(*p.hexaco);
    }
  }
  if (!bigfive || !hexaco) throw ConfigError("correlate needs predictions for both inventories");
  const auto m = cross_correlation_matrix(*bigfive, *hexaco);
  auto os = open_out(out_csv);
  os << cross_matrix_csv(m);
  if (!os) throw IoError("failed writing " + out_csv.string());
  log << "predicted-trait cross-correlation over " << bigfive->size() << " " << split_name(split)
      << " samples:\n"
      << matrix_text(m);
  return m;
}

GradcheckResult gradcheck(const ModelConfig& base, std::uint64_t seed, std::ostream& log, bool corrupt_backward) {
  ModelConfig cfg = base;
  cfg.seed = seed;
  cfg.dropout = 0.0;  // the loss must be a deterministic function of the weights
  JointModel model(cfg);

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto frames = [&](std::size_t t, std::size_t d) {
    std::vector<double> v(t * d);
    for (auto& x : v) x = normal(rng);
    return Tensor::from({t, d}, std::move(v));
  };
  std::vector<ModalityFeatures> batch(2);
  std::vector<TraitValues> targets(2);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (cfg.modalities.audio) batch[i].audio = frames(6 + i, cfg.d_audio_in);
    if (cfg.modalities.visual) batch[i].visual = frames(3 + i, cfg.d_visual_in);
    if (cfg.modalities.text) {
      std::vector<std::size_t> ids(4 + i);
      for (auto& id : ids) id = static_cast<std::size_t>(rng() % cfg.vocab_size);
      batch[i].text = ids;
    }
    BigFive y;
    Hexaco z;
    for (auto& v : y) v = unit(rng);
    for (auto& v : z) v = unit(rng);
    if (cfg.heads.bigfive) targets[i].bigfive = y;
    if (cfg.heads.hexaco) targets[i].hexaco = z;
  }

  auto loss = [&] {
    auto preds = model.forward_batch(batch, Mode::train);
    Tensor l = joint_loss(preds, targets);
    return corrupt_backward ? corrupted(l) : l;
  };

  GradcheckResult r;
  r.passed = true;
  for (auto& [name, params] : model.parameter_groups()) {
    std::vector<Tensor> inputs;
    for (auto& p : params) inputs.push_back(p.tensor);
    const double err = grad_check(loss, inputs, 1e-5);
    r.groups.emplace_back(name, err);
    const bool ok = err <= r.tolerance;
    r.passed = r.passed && ok;
    char line[160];
    std::snprintf(line, sizeof line, "%-20s max rel err %.3e  %s\n", name.c_str(), err, ok ? "ok" : "FAIL");
    log << line;
  }
  log << (r.passed ? "gradcheck passed" : "gradcheck FAILED") << " (tolerance " << r.tolerance << ")\n";
  return r;
}

}  // namespace persona::cli
