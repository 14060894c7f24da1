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

#ifndef PERSONA_EVALUATION_HPP
#define PERSONA_EVALUATION_HPP

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "persona/dataset.hpp"
#include "persona/model.hpp"
#include "persona/traits.hpp"

namespace persona {

/// 1 - mean |pred - truth|. Inputs must lie in [0, 1].
double accuracy_k(std::span<const double> pred, std::span<const double> truth);

/// Sample Pearson correlation. Throws UndefinedCorrelation if either series
/// is constant; `label` names the series in the message.
double pearson(std::span<const double> x, std::span<const double> y, std::string_view label = {});

struct HeadReport {
  Head head = Head::bigfive;
  std::vector<double> correlation;  // per trait, in head order
  std::vector<double> accuracy;     // per trait, in [0, 1]
  double mae = 0.0;                 // mean |pred - truth| over all traits and samples

  double mean_accuracy() const;
  double mean_correlation() const;
};

struct EvalReport {
  std::string model;       // "joint", "bigfive" or "hexaco"
  std::string modalities;  // e.g. "audio,visual"
  std::size_t samples = 0;
  std::optional<HeadReport> bigfive;
  std::optional<HeadReport> hexaco;
};

using Predictor = std::function<TraitValues(const Sample&)>;

/// Scores `predict` on every sample for the requested heads.
EvalReport evaluate(std::span<const Sample> samples, const Predictor& predict, HeadSet heads);

/// Eval-mode predictions of `model` over `samples`.
EvalReport evaluate_model(const JointModel& model, std::span<const Sample> samples);

/// Eval-mode predictions, one TraitValues per sample.
std::vector<TraitValues> predict_all(const JointModel& model, std::span<const Sample> samples);

using CrossMatrix = Eigen::Matrix<double, kBigFiveTraits, kHexacoTraits>;

/// Entry (i, j) = pearson(Big Five column i, HEXACO column j). Rows
/// O,C,E,A,N; columns H,E,X,A,C,O.
CrossMatrix cross_correlation_matrix(std::span<const BigFive> bigfive, std::span<const Hexaco> hexaco);

/// One row per metric, columns per trait; accuracy scaled by 100.
std::string report_csv(const EvalReport& report);
/// Aligned text table of the same content.
std::string report_text(const EvalReport& report);
/// Header ",H,E,X,A,C,O", then one labelled row per Big Five trait.
std::string cross_matrix_csv(const CrossMatrix& m);

}  // namespace persona

#endif  // PERSONA_EVALUATION_HPP
