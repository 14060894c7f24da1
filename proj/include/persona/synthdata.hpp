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

#ifndef PERSONA_SYNTHDATA_HPP
#define PERSONA_SYNTHDATA_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "persona/dataset.hpp"

namespace persona {

// Trait coordinates in generator matrices: 5 Big Five (O,C,E,A,N) then 6
// HEXACO (H,E,X,A,C,O).

/// Observer-rated Big Five x HEXACO correlations (rows O,C,E,A,N; columns
/// H,E,X,A,C,O) used as the default cross block.
Eigen::Matrix<double, 5, 6> reference_cross_block();

/// Clamps negative eigenvalues of a symmetric matrix to zero, reconstructs,
/// and rescales to unit diagonal. Throws ConfigError if `m` is not symmetric.
Eigen::MatrixXd nearest_psd(const Eigen::MatrixXd& m);

/// Full 11x11 correlation matrix whose cross block equals `cross`.
/// Within-block entries start from a rank-2 factorisation of the cross block
/// and are then refined by alternating projections that hold the cross
/// block fixed, so the result is positive semidefinite.
Eigen::MatrixXd complete_correlation(const Eigen::Matrix<double, 5, 6>& cross);

struct LengthRange {
  std::size_t min = 1;
  std::size_t max = 1;
};

struct GeneratorConfig {
  /// Target Pearson correlation of the uniform [0,1] labels; empty means
  /// complete_correlation(reference_cross_block()).
  Eigen::MatrixXd target;
  double audio_noise = 1.0;
  double visual_noise = 1.0;
  double text_noise = 0.5;
  double drift = 0.1;  // amplitude of the slow per-dimension drift, 0 disables
  LengthRange audio_length{12, 16};
  LengthRange visual_length{4, 6};
  LengthRange text_length{6, 8};
  std::size_t persons = 100;
  std::size_t videos_per_person = 10;
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  std::size_t vocab_size = 64;
  std::size_t audio_dim = 80;
  std::size_t visual_dim = 16;
  double jitter = 0.02;  // per-video std around the person's traits
  ModalitySet modalities = ModalitySet::all();
  std::uint64_t seed = 0;

  void validate() const;
  Eigen::MatrixXd resolved_target() const;
};

/// Seeded fixed projections P_m (one per modality) and drift phases.
struct RenderBasis {
  Eigen::MatrixXd audio;   // [audio_dim x 11]
  Eigen::MatrixXd visual;  // [visual_dim x 11]
  Eigen::MatrixXd text;    // [text positions x 11], cycled over positions
  Eigen::VectorXd audio_phase, visual_phase;

  static RenderBasis make(const GeneratorConfig& cfg);
};

/// Draws n label vectors in [0,1]^11 with a Gaussian copula whose uniform
/// marginals carry the configured Pearson correlation.
Eigen::MatrixXd sample_traits(const GeneratorConfig& cfg, std::size_t n, std::mt19937_64& rng);

/// Renders one video's features from its 11 trait values:
/// frame t = P_m (traits - 0.5) + drift(t) + noise.
ModalityFeatures render_modalities(const Eigen::VectorXd& traits, const GeneratorConfig& cfg,
                                   const RenderBasis& basis, std::mt19937_64& rng);

/// Persons split person-disjointly into train/val/test; each person has a
/// base trait draw and each video a jittered copy. Features are rounded to
/// float32 so that the in-memory set equals what the files hold.
std::vector<Sample> generate_dataset(const GeneratorConfig& cfg);

/// Writes <out>/manifest.jsonl and <out>/<split>/<id>.<modality>.mmpt.
void write_dataset(const std::filesystem::path& out, std::span<const Sample> samples);

/// Pearson correlations between the Big Five and HEXACO label columns.
Eigen::Matrix<double, 5, 6> empirical_cross_block(const Eigen::MatrixXd& traits);

}  // namespace persona

#endif  // PERSONA_SYNTHDATA_HPP
