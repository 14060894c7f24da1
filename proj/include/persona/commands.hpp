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

#ifndef PERSONA_COMMANDS_HPP
#define PERSONA_COMMANDS_HPP

#include <array>
#include <exception>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "persona/config.hpp"
#include "persona/evaluation.hpp"
#include "persona/scoring.hpp"
#include "persona/training.hpp"

namespace persona::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kConfigError = 2, kIoError = 3, kNumericError = 4 };

/// Maps a library exception onto the exit-code contract.
int exit_code_for(const std::exception& e);

struct GenDataResult {
  std::array<std::size_t, 3> split_counts{};  // train, val, test
  CrossMatrix empirical;
};

/// Generates the synthetic dataset into `out` and prints a summary.
GenDataResult gen_data(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

/// Scores an annotation CSV against an inventory; writes one row per video.
std::vector<scoring::VideoScores> score(const std::filesystem::path& annotations,
                                        const std::filesystem::path& inventory,
                                        const std::filesystem::path& out_csv, std::ostream& log);

struct TrainResult {
  TrainState state;
  EvalReport final_train;  // eval-mode metrics on the train split after restoring the best weights
};

/// Trains cfg.model on the manifest's train split with early stopping on val.
/// Writes <out_dir>/checkpoint.tfck and <out_dir>/train_log.jsonl.
TrainResult train(const RunConfig& cfg, const std::filesystem::path& manifest,
                  const std::filesystem::path& out_dir, std::ostream& log);

/// Writes <out_dir>/report.csv and <out_dir>/report.txt.
EvalReport evaluate(const std::filesystem::path& checkpoint, const std::filesystem::path& manifest,
                    Split split, const std::filesystem::path& out_dir, std::ostream& log);

/// One joint checkpoint, or one Big Five and one HEXACO checkpoint in
/// either order. Writes the 5x6 matrix as CSV to `out_csv`.
CrossMatrix correlate(const std::vector<std::filesystem::path>& checkpoints,
                      const std::filesystem::path& manifest, Split split,
                      const std::filesystem::path& out_csv, std::ostream& log);

struct GradcheckResult {
  std::vector<std::pair<std::string, double>> groups;  // max relative error per parameter group
  double tolerance = 1e-4;
  bool passed = false;
};

/// Finite-difference check of every parameter group of a model built from
/// `cfg` on a two-sample batch covering its modalities. With
/// `corrupt_backward` the loss passes through an op whose gradient is
/// deliberately wrong, so the check must fail.
GradcheckResult gradcheck(const ModelConfig& cfg, std::uint64_t seed, std::ostream& log,
                          bool corrupt_backward = false);

}  // namespace persona::cli

#endif  // PERSONA_COMMANDS_HPP
