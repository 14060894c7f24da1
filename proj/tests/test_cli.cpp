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

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "persona/commands.hpp"
#include "persona/config.hpp"
#include "persona/errors.hpp"

using namespace persona;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "persona_cli_test";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << s;
}

// Small enough to train in well under a second.
const char* kSmallConfig = R"(# test run
run.seed = 4
data.persons = 12
data.videos_per_person = 2
data.audio_min_frames = 8
data.audio_max_frames = 8
data.visual_min_frames = 3
data.visual_max_frames = 4
data.text_min_tokens = 4
data.text_max_tokens = 5
data.vocab_size = 10
data.visual_dim = 4
model.d_model = 8
model.d_ff = 16
model.n_heads = 2
model.audio_blocks = 1
model.text_blocks = 1
model.visual_blocks = 1
model.multimodal_blocks = 1
model.vocab_size = 10
model.d_visual_in = 4
model.dropout = 0.0
train.max_epochs = 3
train.batch_size = 4
)";

RunConfig small_config() {
  std::istringstream in(kSmallConfig);
  return parse_config(in);
}

int run_cli(const std::string& args, std::string* output = nullptr) {
  const fs::path log = kWork / "cli_output.txt";
  const std::string cmd = std::string("\"") + PERSONA_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) *output = slurp(log);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    write_text(kWork / "small.cfg", kSmallConfig);
    std::ostringstream log;
    cli::gen_data(small_config(), kWork / "data", log);
  }
  static void TearDownTestSuite() { fs::remove_all(kWork); }

  static fs::path manifest() { return kWork / "data" / "manifest.jsonl"; }
};

}  // namespace

TEST(Config, ParsesCommentsAndSeedPrecedence) {
  std::istringstream in("model.seed = 9  # section seed wins\nrun.seed=3\n\n  train.learning_rate = 0.01\n");
  const auto cfg = parse_config(in);
  EXPECT_EQ(cfg.model.seed, 9u);
  EXPECT_EQ(cfg.train.seed, 3u);
  EXPECT_EQ(cfg.data.seed, 3u);
  EXPECT_EQ(cfg.train.optimizer.learning_rate, 0.01);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  std::istringstream unknown("model.width = 3\n");
  EXPECT_THROW(parse_config(unknown), ConfigError);
  std::istringstream bad("train.batch_size = many\n");
  EXPECT_THROW(parse_config(bad), ConfigError);
  std::istringstream no_eq("model.d_model 8\n");
  EXPECT_THROW(parse_config(no_eq), ConfigError);
  EXPECT_THROW(load_config(kWork / "nope" / "missing.cfg"), ConfigError);
}

TEST(Config, TextRoundTrip) {
  RunConfig cfg = small_config();
  cfg.train.optimizer.learning_rate = 0.1 + 0.2;
  std::istringstream in(config_text(cfg));
  const auto back = parse_config(in);
  EXPECT_EQ(back.model, cfg.model);
  EXPECT_EQ(back.train.optimizer.learning_rate, cfg.train.optimizer.learning_rate);
  EXPECT_EQ(config_text(back), config_text(cfg));
  const std::string text = config_text(cfg);
  // run.seed is write-only: it fans out to the section seeds.
  EXPECT_EQ(config_keys().size() - 1, static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')));

  ModelConfig m = cfg.model;
  m.modalities = ModalitySet::parse("text");
  m.heads = HeadSet{false, true};
  EXPECT_EQ(model_config_from_text(model_config_text(m)), m);
  EXPECT_THROW(model_config_from_text("train.seed=1\n"), ParseError);
}

TEST(Config, FormatDoubleIsShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(100.0), "100");
  for (double v : {1.0 / 3.0, 2.5e-17, -7.125, 0.30000000000000004}) EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(Dataset, FeatureFileRoundTripAndCorruption) {
  fs::create_directories(kWork);
  const Tensor t = Tensor::from({2, 3}, {0.5, -1.25, 3.0, 1e-3, 7.0, 0.1});
  write_feature_file(kWork / "x.mmpt", t);
  const Tensor back = read_feature_file(kWork / "x.mmpt");
  EXPECT_EQ(back.shape(), t.shape());
  const Tensor r = round_to_float32(t);
  for (std::size_t i = 0; i < t.numel(); ++i) EXPECT_EQ(back[i], r[i]);
  EXPECT_EQ(slurp(kWork / "x.mmpt").substr(0, 4), "MMPT");

  std::string bytes = slurp(kWork / "x.mmpt");
  write_text(kWork / "y.mmpt", bytes + "junk");
  EXPECT_THROW(read_feature_file(kWork / "y.mmpt"), IoError);
  write_text(kWork / "z.mmpt", "NOPE" + bytes.substr(4));
  EXPECT_THROW(read_feature_file(kWork / "z.mmpt"), IoError);
}

TEST(Dataset, ManifestLineRoundTripAndRangeCheck) {
  ManifestRecord r;
  r.id = "p1_v0";
  r.person = "p1";
  r.split = Split::val;
  r.audio_path = "val/p1_v0.audio.mmpt";
  r.bigfive = {0.1, 0.2, 0.3, 0.4, 0.5};
  r.hexaco = {0.6, 0.7, 0.8, 0.9, 1.0, 0.0};
  const auto back = parse_manifest_line(manifest_line(r));
  EXPECT_EQ(back.id, r.id);
  EXPECT_EQ(back.split, Split::val);
  EXPECT_EQ(back.audio_path, r.audio_path);
  EXPECT_EQ(back.hexaco, r.hexaco);

  auto j = nlohmann::json::parse(manifest_line(r));
  j["bigfive"][2] = 1.5;
  EXPECT_THROW(parse_manifest_line(j.dump()), RangeError);
  EXPECT_THROW(parse_manifest_line("{not json"), ParseError);
  EXPECT_THROW(parse_split("holdout"), ParseError);
}

TEST(ExitCodes, MapErrorKinds) {
  EXPECT_EQ(cli::exit_code_for(ConfigError("x")), cli::kConfigError);
  EXPECT_EQ(cli::exit_code_for(ParseError("x")), cli::kConfigError);
  EXPECT_EQ(cli::exit_code_for(RangeError("x")), cli::kConfigError);
  EXPECT_EQ(cli::exit_code_for(ShapeError("x")), cli::kConfigError);
  EXPECT_EQ(cli::exit_code_for(IoError("x")), cli::kIoError);
  EXPECT_EQ(cli::exit_code_for(UndefinedCorrelation("x")), cli::kNumericError);
  EXPECT_EQ(cli::exit_code_for(NumericError("x")), cli::kNumericError);
}

TEST_F(Pipeline, GenDataWritesSplitsAndIsReproducible) {
  const auto samples = load_dataset(manifest());
  EXPECT_EQ(samples.size(), 24u);
  std::ostringstream log;
  const auto again = cli::gen_data(small_config(), kWork / "data2", log);
  EXPECT_EQ(again.split_counts[0] + again.split_counts[1] + again.split_counts[2], 24u);
  EXPECT_EQ(slurp(manifest()), slurp(kWork / "data2" / "manifest.jsonl"));
  EXPECT_NE(log.str().find("label cross-correlation"), std::string::npos);
}

TEST_F(Pipeline, TrainThenEvaluateReproducesFinalMetrics) {
  std::ostringstream log;
  const auto result = cli::train(small_config(), manifest(), kWork / "run", log);
  ASSERT_TRUE(fs::exists(kWork / "run" / "checkpoint.tfck"));

  std::ifstream lines(kWork / "run" / "train_log.jsonl");
  std::string line, last;
  std::size_t epochs = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    if (j.contains("epoch")) ++epochs;
    last = line;
  }
  EXPECT_EQ(epochs, result.state.history.size());
  const auto final_record = nlohmann::json::parse(last);
  EXPECT_TRUE(final_record["final"].get<bool>());

  const auto report = cli::evaluate(kWork / "run" / "checkpoint.tfck", manifest(), Split::train, kWork / "eval", log);
  ASSERT_TRUE(report.bigfive && result.final_train.bigfive);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_NEAR(report.bigfive->correlation[k], result.final_train.bigfive->correlation[k], 1e-9);
    EXPECT_NEAR(report.bigfive->accuracy[k], result.final_train.bigfive->accuracy[k], 1e-9);
    EXPECT_NEAR(final_record["bigfive"]["corr"][k].get<double>(), report.bigfive->correlation[k], 1e-9);
  }
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_NEAR(report.hexaco->accuracy[k], result.final_train.hexaco->accuracy[k], 1e-9);
  }
  EXPECT_TRUE(fs::exists(kWork / "eval" / "report.csv"));
  EXPECT_TRUE(fs::exists(kWork / "eval" / "report.txt"));

  const auto m = cli::correlate({kWork / "run" / "checkpoint.tfck"}, manifest(), Split::train,
                                kWork / "eval" / "cross.csv", log);
  EXPECT_EQ(m.rows(), 5);
  EXPECT_EQ(m.cols(), 6);
  const std::string csv = slurp(kWork / "eval" / "cross.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), ",H,E,X,A,C,O");
}

TEST_F(Pipeline, TaskSpecificPairCorrelates) {
  RunConfig cfg = small_config();
  cfg.train.max_epochs = 1;
  std::ostringstream log;
  cfg.model.heads = HeadSet{true, false};
  cli::train(cfg, manifest(), kWork / "b5", log);
  cfg.model.heads = HeadSet{false, true};
  cli::train(cfg, manifest(), kWork / "hx", log);
  const auto a = cli::correlate({kWork / "hx" / "checkpoint.tfck", kWork / "b5" / "checkpoint.tfck"}, manifest(),
                                Split::train, kWork / "pair.csv", log);
  const auto b = cli::correlate({kWork / "b5" / "checkpoint.tfck", kWork / "hx" / "checkpoint.tfck"}, manifest(),
                                Split::train, kWork / "pair2.csv", log);
  EXPECT_EQ(a, b);
  EXPECT_THROW(cli::correlate({kWork / "b5" / "checkpoint.tfck"}, manifest(), Split::train, kWork / "x.csv", log),
               ConfigError);
}

TEST_F(Pipeline, ScoreCommand) {
  const fs::path inv = fs::path(PERSONA_SOURCE_DIR) / "data" / "inventories" / "bigfive50.json";
  std::string csv = "observer_id,video_id,item_id,response\n";
  for (int id = 1; id <= 50; ++id) csv += "o1,clip," + std::to_string(id) + ",Neither Inaccurate nor Accurate\n";
  write_text(kWork / "ann.csv", csv);
  std::ostringstream log;
  const auto videos = cli::score(kWork / "ann.csv", inv, kWork / "scores.csv", log);
  ASSERT_EQ(videos.size(), 1u);
  for (double v : videos[0].scores.values) EXPECT_EQ(v, 0.5);
  const std::string out = slurp(kWork / "scores.csv");
  EXPECT_EQ(out.substr(0, out.find('\n')), "video_id,O,C,E,A,N");
  EXPECT_NE(out.find("clip,0.5,0.5,0.5,0.5,0.5"), std::string::npos);

  // Incomplete sheet.
  write_text(kWork / "short.csv", "observer_id,video_id,item_id,response\no1,clip,1,3\n");
  EXPECT_THROW(cli::score(kWork / "short.csv", inv, kWork / "s.csv", log), CompletenessError);
}

TEST(Gradcheck, TinyModelPassesAndCorruptionFails) {
  std::ostringstream log;
  const auto ok = cli::gradcheck(ModelConfig::tiny(), 1, log);
  EXPECT_TRUE(ok.passed) << log.str();
  EXPECT_GE(ok.groups.size(), 6u);
  for (const auto& [name, err] : ok.groups) EXPECT_LE(err, ok.tolerance) << name;
  const auto bad = cli::gradcheck(ModelConfig::tiny(), 1, log, true);
  EXPECT_FALSE(bad.passed);
}

TEST_F(Pipeline, BinaryExitCodes) {
  std::string out;
  EXPECT_EQ(run_cli("", &out), cli::kConfigError);
  EXPECT_EQ(run_cli("frobnicate"), cli::kConfigError);
  EXPECT_EQ(run_cli("config -c \"" + (kWork / "absent.cfg").string() + "\""), cli::kConfigError);
  EXPECT_EQ(run_cli("config --set model.nonsense=1"), cli::kConfigError);
  EXPECT_EQ(run_cli("evaluate \"" + (kWork / "absent.tfck").string() + "\" -m \"" + manifest().string() + "\""),
            cli::kIoError);

  EXPECT_EQ(run_cli("config -c \"" + (kWork / "small.cfg").string() + "\" --seed 11", &out), cli::kOk);
  EXPECT_NE(out.find("model.seed = 11"), std::string::npos);
  EXPECT_NE(out.find("model.d_model = 8"), std::string::npos);
  EXPECT_EQ(run_cli("config --keys", &out), cli::kOk);
  EXPECT_NE(out.find("train.patience"), std::string::npos);

  EXPECT_EQ(run_cli("gradcheck", &out), cli::kOk);
  EXPECT_NE(out.find("gradcheck passed"), std::string::npos);
  EXPECT_EQ(run_cli("gradcheck --corrupt-backward", &out), cli::kCheckFailed);

  // Zeroed head weights give constant predictions, so correlations are undefined.
  ModelConfig mc = small_config().model;
  JointModel m(mc);
  for (auto* head : {&*m.bigfive_head, &*m.hexaco_head}) {
    for (auto& v : head->fc.weight.mutable_data()) v = 0.0;
  }
  save_checkpoint(m, kWork / "flat.tfck");
  EXPECT_EQ(run_cli("correlate \"" + (kWork / "flat.tfck").string() + "\" -m \"" + manifest().string() +
                        "\" --split train -o \"" + (kWork / "flat.csv").string() + "\"",
                    &out),
            cli::kNumericError);
  EXPECT_NE(out.find("correlation undefined"), std::string::npos);
}
