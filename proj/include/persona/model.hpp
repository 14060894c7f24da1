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

#ifndef PERSONA_MODEL_HPP
#define PERSONA_MODEL_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "persona/layers.hpp"
#include "persona/traits.hpp"

namespace persona {

enum class Modality { audio = 0, text = 1, visual = 2 };

inline constexpr std::size_t kModalityCount = 3;
std::string_view modality_name(Modality m);

struct ModalitySet {
  bool audio = false;
  bool text = false;
  bool visual = false;

  static ModalitySet all() { return {true, true, true}; }
  /// Comma-separated subset of {audio, text, visual}.
  static ModalitySet parse(std::string_view list);

  bool has(Modality m) const;
  bool empty() const { return !audio && !text && !visual; }
  std::string str() const;
  friend bool operator==(const ModalitySet&, const ModalitySet&) = default;
};

struct HeadSet {
  bool bigfive = false;
  bool hexaco = false;

  static HeadSet joint() { return {true, true}; }
  /// "joint", "bigfive", "hexaco" or a comma list of head names.
  static HeadSet parse(std::string_view text);

  bool has(Head h) const { return h == Head::bigfive ? bigfive : hexaco; }
  bool empty() const { return !bigfive && !hexaco; }
  std::string str() const;
  friend bool operator==(const HeadSet&, const HeadSet&) = default;
};

struct ModelConfig {
  std::size_t d_model = 32;
  std::size_t d_ff = 64;
  std::size_t n_heads = 4;
  std::size_t audio_blocks = 2;
  std::size_t text_blocks = 2;
  std::size_t visual_blocks = 1;
  std::size_t multimodal_blocks = 1;
  double dropout = 0.1;
  ModalitySet modalities = ModalitySet::all();
  HeadSet heads = HeadSet::joint();
  std::size_t vocab_size = 64;
  std::size_t d_visual_in = 16;
  std::size_t d_audio_in = 80;
  std::uint64_t seed = 0;

  /// Desk-scale defaults.
  static ModelConfig toy() { return {}; }
  /// 256-wide encoders, 1024 inner, 4 heads, depths 4/6/2/2.
  static ModelConfig full();
  /// Smallest configuration exercising every component; used for gradient checks.
  static ModelConfig tiny();

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ModalityFeatures {
  std::optional<Tensor> audio;                     // [T_a x d_audio_in]
  std::optional<Tensor> visual;                    // [T_v x d_visual_in]
  std::optional<std::vector<std::size_t>> text;    // token ids

  ModalitySet present() const { return {audio.has_value(), text.has_value(), visual.has_value()}; }
};

struct JointOutput {
  std::optional<Tensor> bigfive;  // [5], order O,C,E,A,N
  std::optional<Tensor> hexaco;   // [6], order H,E,X,A,C,O

  TraitValues values() const;
};

struct ModalitySequence {
  Modality modality;
  Tensor states;  // [T x d]
};

struct SegmentedSequence {
  Tensor states;                         // [sum T x d]
  std::vector<std::size_t> segment_ids;  // one modality index per row
};

/// Joins sequences along time in the fixed order audio, text, visual.
/// Missing modalities are skipped.
SegmentedSequence temporal_concat(std::span<const ModalitySequence> parts);

/// Adds the learned segment vector of each row's modality (table [3 x d]).
Tensor add_segment(const SegmentedSequence& seq, const Tensor& segment_table);

class AudioEncoder {
 public:
  AudioEncoder() = default;
  AudioEncoder(const ModelConfig& cfg, std::mt19937_64& rng);
  /// [T x d_audio_in] -> [ceil(ceil(T/2)/2) x d_model]
  Tensor operator()(const Tensor& frames, ForwardContext& ctx) const;
  void append_parameters(const std::string& prefix, ParameterList& out) const;

  ConvDownsample conv1, conv2;
  EncoderStack stack;
};

class TextEncoder {
 public:
  TextEncoder() = default;
  TextEncoder(const ModelConfig& cfg, std::mt19937_64& rng);
  Tensor operator()(std::span<const std::size_t> ids, ForwardContext& ctx) const;
  void append_parameters(const std::string& prefix, ParameterList& out) const;

  Tensor embedding;  // [vocab x d_model]
  EncoderStack stack;
};

// Per-frame linear stem over precomputed visual features.
class VisualEncoder {
 public:
  VisualEncoder() = default;
  VisualEncoder(const ModelConfig& cfg, std::mt19937_64& rng);
  Tensor operator()(const Tensor& frames, ForwardContext& ctx) const;
  void append_parameters(const std::string& prefix, ParameterList& out) const;

  Linear stem;
  EncoderStack stack;
};

/// Single-query additive attention:
///   e_t = v . tanh(W h_t + b),  alpha = softmax(e),  h = sum_t alpha_t h_t
class AttentivePooling {
 public:
  AttentivePooling() = default;
  AttentivePooling(std::size_t d, std::mt19937_64& rng);

  /// Pooling weights alpha as an [L x 1] column.
  Tensor weights(const Tensor& states) const;
  /// [L x d] -> [d]
  Tensor operator()(const Tensor& states) const;
  void append_parameters(const std::string& prefix, ParameterList& out) const;

  Linear projection;  // W, b
  Tensor query;       // v, [d x 1]
};

/// Fully connected layer with sigmoid output.
class RegressionHead {
 public:
  RegressionHead() = default;
  RegressionHead(std::size_t d, std::size_t outputs, std::mt19937_64& rng);
  Tensor operator()(const Tensor& pooled) const;
  void append_parameters(const std::string& prefix, ParameterList& out) const;

  Linear fc;
};

/// Multimodal transformer with segment-tagged temporal concatenation,
/// attentive pooling, and a Big Five and/or HEXACO sigmoid head.
class JointModel {
 public:
  explicit JointModel(ModelConfig cfg);
  // Tensors are shared handles; a copy would alias the weights.
  JointModel(const JointModel&) = delete;
  JointModel& operator=(const JointModel&) = delete;
  JointModel(JointModel&&) = default;
  JointModel& operator=(JointModel&&) = default;

  const ModelConfig& config() const { return cfg_; }

  Tensor encode_audio(const Tensor& frames, Mode mode) const;
  Tensor encode_text(std::span<const std::size_t> ids, Mode mode) const;
  Tensor encode_visual(const Tensor& frames, Mode mode) const;
  Tensor add_segment(const SegmentedSequence& seq) const;
  Tensor multimodal_encode(const Tensor& states, Mode mode) const;
  Tensor attentive_pool(const Tensor& states) const { return pooling(states); }
  JointOutput predict_heads(const Tensor& pooled) const;

  /// Pooled vector h for one sample (everything before the heads).
  Tensor pooled(const ModalityFeatures& features, Mode mode) const;
  JointOutput forward(const ModalityFeatures& features, Mode mode) const;
  std::vector<JointOutput> forward_batch(std::span<const ModalityFeatures> batch, Mode mode) const;

  ParameterList parameters() const;
  /// Parameters grouped by component: encoder.audio, encoder.text,
  /// encoder.visual, encoder.multimodal, segment, pooling, head.bigfive,
  /// head.hexaco (configured components only).
  std::vector<std::pair<std::string, ParameterList>> parameter_groups() const;
  /// Copies values of every same-named, same-shaped parameter from `other`.
  /// Returns the number copied.
  std::size_t copy_parameters_from(const JointModel& other);
  void zero_grad();

  /// Reseeds the dropout stream.
  void reseed_dropout(std::uint64_t seed);

  // Components are public so tests can set weights by hand.
  std::optional<AudioEncoder> audio;
  std::optional<TextEncoder> text;
  std::optional<VisualEncoder> visual;
  Tensor segments;  // [3 x d_model], rows audio, text, visual
  EncoderStack fusion;
  AttentivePooling pooling;
  std::optional<RegressionHead> bigfive_head;
  std::optional<RegressionHead> hexaco_head;

 private:
  void check_features(const ModalityFeatures& features) const;

  ModelConfig cfg_;
  mutable std::mt19937_64 dropout_rng_;
};

/// Writes a versioned binary checkpoint ("TFCK").
void save_checkpoint(const JointModel& model, const std::filesystem::path& path);
/// Reads a checkpoint, rebuilding the model from its stored configuration
/// and validating every tensor shape against it.
JointModel load_checkpoint(const std::filesystem::path& path);

}  // namespace persona

#endif  // PERSONA_MODEL_HPP
