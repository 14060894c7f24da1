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

#include "persona/model.hpp"

#include <algorithm>
#include <array>
#include <map>

namespace persona {

namespace {

enum Component : std::uint64_t {
  kAudioStream = 1,
  kTextStream,
  kVisualStream,
  kSegmentStream,
  kFusionStream,
  kPoolingStream,
  kBigFiveStream,
  kHexacoStream,
  kDropoutStream,
};

// Every component draws its initial weights from its own stream so that
// models differing only in modalities or heads share identical weights for
// the parts they have in common.
std::mt19937_64 component_rng(std::uint64_t seed, std::uint64_t component) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(component)};
  return std::mt19937_64(seq);
}

Tensor add_positions(const Tensor& x) {
  return add(x, sinusoidal_positions(x.dim(0), x.dim(1)));
}

void require_frames(const char* what, const Tensor& x, std::size_t width) {
  if (x.rank() != 2 || x.dim(1) != width) {
    throw ShapeError(std::string(what) + " features must be [T x " + std::to_string(width) +
                     "], got " + shape_string(x.shape()));
  }
  if (x.dim(0) == 0) throw ShapeError(std::string(what) + " sequence is empty");
}

}  // namespace

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::audio:
      return "audio";
    case Modality::text:
      return "text";
    case Modality::visual:
      return "visual";
  }
  return "?";
}

ModalitySet ModalitySet::parse(std::string_view list) {
  ModalitySet set;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    auto end = list.find(',', pos);
    if (end == std::string_view::npos) end = list.size();
    auto item = list.substr(pos, end - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item == "audio") {
      set.audio = true;
    } else if (item == "text") {
      set.text = true;
    } else if (item == "visual") {
      set.visual = true;
    } else {
      throw ConfigError("unknown modality '" + std::string(item) + "' (expected audio, text, visual)");
    }
    pos = end + 1;
  }
  return set;
}

bool ModalitySet::has(Modality m) const {
  switch (m) {
    case Modality::audio:
      return audio;
    case Modality::text:
      return text;
    case Modality::visual:
      return visual;
  }
  return false;
}

std::string ModalitySet::str() const {
  std::string s;
  for (auto m : {Modality::audio, Modality::text, Modality::visual}) {
    if (!has(m)) continue;
    if (!s.empty()) s += ',';
    s += modality_name(m);
  }
  return s;
}

HeadSet HeadSet::parse(std::string_view text) {
  if (text == "joint") return joint();
  HeadSet set;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    auto item = text.substr(pos, end - pos);
    if (item == "bigfive") {
      set.bigfive = true;
    } else if (item == "hexaco") {
      set.hexaco = true;
    } else {
      throw ConfigError("unknown head '" + std::string(item) + "' (expected joint, bigfive, hexaco)");
    }
    pos = end + 1;
  }
  return set;
}

std::string HeadSet::str() const {
  if (bigfive && hexaco) return "joint";
  if (bigfive) return "bigfive";
  if (hexaco) return "hexaco";
  return "";
}

ModelConfig ModelConfig::full() {
  ModelConfig c;
  c.d_model = 256;
  c.d_ff = 1024;
  c.n_heads = 4;
  c.audio_blocks = 4;
  c.text_blocks = 6;
  c.visual_blocks = 2;
  c.multimodal_blocks = 2;
  c.dropout = 0.1;
  return c;
}

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.d_model = 8;
  c.d_ff = 16;
  c.n_heads = 2;
  c.audio_blocks = 1;
  c.text_blocks = 1;
  c.visual_blocks = 1;
  c.multimodal_blocks = 1;
  c.dropout = 0.0;
  c.vocab_size = 10;
  c.d_visual_in = 4;
  return c;
}

void ModelConfig::validate() const {
  if (d_model == 0 || d_ff == 0) throw ConfigError("model.d_model and model.d_ff must be positive");
  if (n_heads == 0 || d_model % n_heads != 0) {
    throw ConfigError("model.d_model (" + std::to_string(d_model) +
                      ") must be divisible by model.n_heads (" + std::to_string(n_heads) + ")");
  }
  if (modalities.empty()) throw ConfigError("model.modalities must name at least one modality");
  if (heads.empty()) throw ConfigError("model.heads must name at least one head");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("model.dropout must lie in [0, 1)");
  if (modalities.text && vocab_size == 0) throw ConfigError("model.vocab_size must be positive");
  if (modalities.visual && d_visual_in == 0) throw ConfigError("model.d_visual_in must be positive");
  if (modalities.audio && d_audio_in == 0) throw ConfigError("model.d_audio_in must be positive");
}

TraitValues JointOutput::values() const {
  TraitValues v;
  if (bigfive) {
    BigFive y{};
    std::copy_n(bigfive->data().begin(), kBigFiveTraits, y.begin());
    v.bigfive = y;
  }
  if (hexaco) {
    Hexaco z{};
    std::copy_n(hexaco->data().begin(), kHexacoTraits, z.begin());
    v.hexaco = z;
  }
  return v;
}

SegmentedSequence temporal_concat(std::span<const ModalitySequence> parts) {
  if (parts.empty()) throw ShapeError("temporal_concat: no modality sequences");
  std::vector<const ModalitySequence*> ordered;
  for (const auto& p : parts) ordered.push_back(&p);
  std::stable_sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) {
    return static_cast<int>(a->modality) < static_cast<int>(b->modality);
  });
  const std::size_t d = ordered.front()->states.dim(1);
  SegmentedSequence out;
  std::vector<Tensor> tensors;
  for (const auto* p : ordered) {
    if (p->states.rank() != 2 || p->states.dim(1) != d) {
      throw ShapeError("temporal_concat: " + std::string(modality_name(p->modality)) +
                       " states " + shape_string(p->states.shape()) + " do not have width " +
                       std::to_string(d));
    }
    tensors.push_back(p->states);
    out.segment_ids.insert(out.segment_ids.end(), p->states.dim(0),
                           static_cast<std::size_t>(p->modality));
  }
  out.states = concat_rows(tensors);
  return out;
}

Tensor add_segment(const SegmentedSequence& seq, const Tensor& segment_table) {
  return add(seq.states, gather_rows(segment_table, seq.segment_ids));
}

AudioEncoder::AudioEncoder(const ModelConfig& cfg, std::mt19937_64& rng)
    : conv1(cfg.d_audio_in, cfg.d_model, rng),
      conv2(cfg.d_model, cfg.d_model, rng),
      stack(cfg.audio_blocks, cfg.d_model, cfg.d_ff, cfg.n_heads, cfg.dropout, rng) {}

Tensor AudioEncoder::operator()(const Tensor& frames, ForwardContext& ctx) const {
  return stack(add_positions(conv2(conv1(frames))), ctx);
}

void AudioEncoder::append_parameters(const std::string& prefix, ParameterList& out) const {
  conv1.append_parameters(prefix + ".conv1", out);
  conv2.append_parameters(prefix + ".conv2", out);
  stack.append_parameters(prefix, out);
}

TextEncoder::TextEncoder(const ModelConfig& cfg, std::mt19937_64& rng)
    : embedding(init_normal({cfg.vocab_size, cfg.d_model}, 1.0, rng)),
      stack(cfg.text_blocks, cfg.d_model, cfg.d_ff, cfg.n_heads, cfg.dropout, rng) {}

Tensor TextEncoder::operator()(std::span<const std::size_t> ids, ForwardContext& ctx) const {
  return stack(add_positions(gather_rows(embedding, ids)), ctx);
}

void TextEncoder::append_parameters(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".embedding", embedding});
  stack.append_parameters(prefix, out);
}

VisualEncoder::VisualEncoder(const ModelConfig& cfg, std::mt19937_64& rng)
    : stem(cfg.d_visual_in, cfg.d_model, rng),
      stack(cfg.visual_blocks, cfg.d_model, cfg.d_ff, cfg.n_heads, cfg.dropout, rng) {}

Tensor VisualEncoder::operator()(const Tensor& frames, ForwardContext& ctx) const {
  return stack(add_positions(stem(frames)), ctx);
}

void VisualEncoder::append_parameters(const std::string& prefix, ParameterList& out) const {
  stem.append_parameters(prefix + ".stem", out);
  stack.append_parameters(prefix, out);
}

AttentivePooling::AttentivePooling(std::size_t d, std::mt19937_64& rng)
    : projection(d, d, rng), query(init_weight({d, 1}, d, 1, rng)) {}

Tensor AttentivePooling::weights(const Tensor& states) const {
  if (states.rank() != 2 || states.dim(0) == 0) {
    throw ShapeError("attentive pooling needs a non-empty [L x d] sequence, got " +
                     shape_string(states.shape()));
  }
  return softmax(matmul(tanh(projection(states)), query), 0);
}

Tensor AttentivePooling::operator()(const Tensor& states) const {
  Tensor alpha = weights(states);
  return reshape(matmul(transpose(alpha), states), {states.dim(1)});
}

void AttentivePooling::append_parameters(const std::string& prefix, ParameterList& out) const {
  projection.append_parameters(prefix + ".projection", out);
  out.push_back({prefix + ".query", query});
}

RegressionHead::RegressionHead(std::size_t d, std::size_t outputs, std::mt19937_64& rng)
    : fc(d, outputs, rng) {}

Tensor RegressionHead::operator()(const Tensor& pooled) const {
  Tensor row = reshape(pooled, {1, pooled.numel()});
  Tensor out = sigmoid(fc(row));
  return reshape(out, {out.numel()});
}

void RegressionHead::append_parameters(const std::string& prefix, ParameterList& out) const {
  fc.append_parameters(prefix, out);
}

JointModel::JointModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (cfg_.modalities.audio) {
    auto rng = component_rng(cfg_.seed, kAudioStream);
    audio.emplace(cfg_, rng);
  }
  if (cfg_.modalities.text) {
    auto rng = component_rng(cfg_.seed, kTextStream);
    text.emplace(cfg_, rng);
  }
  if (cfg_.modalities.visual) {
    auto rng = component_rng(cfg_.seed, kVisualStream);
    visual.emplace(cfg_, rng);
  }
  {
    auto rng = component_rng(cfg_.seed, kSegmentStream);
    segments = init_normal({kModalityCount, cfg_.d_model}, 0.5, rng);
  }
  {
    auto rng = component_rng(cfg_.seed, kFusionStream);
    fusion = EncoderStack(cfg_.multimodal_blocks, cfg_.d_model, cfg_.d_ff, cfg_.n_heads,
                          cfg_.dropout, rng);
  }
  {
    auto rng = component_rng(cfg_.seed, kPoolingStream);
    pooling = AttentivePooling(cfg_.d_model, rng);
  }
  if (cfg_.heads.bigfive) {
    auto rng = component_rng(cfg_.seed, kBigFiveStream);
    bigfive_head.emplace(cfg_.d_model, kBigFiveTraits, rng);
  }
  if (cfg_.heads.hexaco) {
    auto rng = component_rng(cfg_.seed, kHexacoStream);
    hexaco_head.emplace(cfg_.d_model, kHexacoTraits, rng);
  }
  dropout_rng_ = component_rng(cfg_.seed, kDropoutStream);
}

void JointModel::reseed_dropout(std::uint64_t seed) { dropout_rng_ = component_rng(seed, kDropoutStream); }

Tensor JointModel::encode_audio(const Tensor& frames, Mode mode) const {
  if (!audio) throw ConfigError("model is not configured for audio input");
  require_frames("audio", frames, cfg_.d_audio_in);
  ForwardContext ctx{mode, &dropout_rng_};
  return (*audio)(frames, ctx);
}

Tensor JointModel::encode_text(std::span<const std::size_t> ids, Mode mode) const {
  if (!text) throw ConfigError("model is not configured for text input");
  if (ids.empty()) throw ShapeError("text sequence is empty");
  for (auto id : ids) {
    if (id >= cfg_.vocab_size) {
      throw RangeError("token id " + std::to_string(id) + " outside vocabulary of " +
                       std::to_string(cfg_.vocab_size));
    }
  }
  ForwardContext ctx{mode, &dropout_rng_};
  return (*text)(ids, ctx);
}

Tensor JointModel::encode_visual(const Tensor& frames, Mode mode) const {
  if (!visual) throw ConfigError("model is not configured for visual input");
  require_frames("visual", frames, cfg_.d_visual_in);
  ForwardContext ctx{mode, &dropout_rng_};
  return (*visual)(frames, ctx);
}

Tensor JointModel::add_segment(const SegmentedSequence& seq) const {
  return persona::add_segment(seq, segments);
}

Tensor JointModel::multimodal_encode(const Tensor& states, Mode mode) const {
  ForwardContext ctx{mode, &dropout_rng_};
  return fusion(states, ctx);
}

JointOutput JointModel::predict_heads(const Tensor& pooled) const {
  JointOutput out;
  if (bigfive_head) out.bigfive = (*bigfive_head)(pooled);
  if (hexaco_head) out.hexaco = (*hexaco_head)(pooled);
  return out;
}

void JointModel::check_features(const ModalityFeatures& features) const {
  const auto present = features.present();
  if (!(present == cfg_.modalities)) {
    throw ConfigError("sample provides modalities {" + present.str() +
                      "} but the model is configured for {" + cfg_.modalities.str() + "}");
  }
}

Tensor JointModel::pooled(const ModalityFeatures& features, Mode mode) const {
  check_features(features);
  std::vector<ModalitySequence> parts;
  if (features.audio) parts.push_back({Modality::audio, encode_audio(*features.audio, mode)});
  if (features.text) parts.push_back({Modality::text, encode_text(*features.text, mode)});
  if (features.visual) parts.push_back({Modality::visual, encode_visual(*features.visual, mode)});
  const auto concat = temporal_concat(parts);
  return attentive_pool(multimodal_encode(add_segment(concat), mode));
}

JointOutput JointModel::forward(const ModalityFeatures& features, Mode mode) const {
  return predict_heads(pooled(features, mode));
}

std::vector<JointOutput> JointModel::forward_batch(std::span<const ModalityFeatures> batch,
                                                   Mode mode) const {
  std::vector<JointOutput> out;
  out.reserve(batch.size());
  for (const auto& f : batch) out.push_back(forward(f, mode));
  return out;
}

std::vector<std::pair<std::string, ParameterList>> JointModel::parameter_groups() const {
  std::vector<std::pair<std::string, ParameterList>> groups;
  auto group = [&](std::string name, auto&& fill) {
    ParameterList list;
    fill(name, list);
    groups.emplace_back(std::move(name), std::move(list));
  };
  if (audio) group("encoder.audio", [&](const std::string& n, ParameterList& l) { audio->append_parameters(n, l); });
  if (text) group("encoder.text", [&](const std::string& n, ParameterList& l) { text->append_parameters(n, l); });
  if (visual) group("encoder.visual", [&](const std::string& n, ParameterList& l) { visual->append_parameters(n, l); });
  group("segment", [&](const std::string& n, ParameterList& l) { l.push_back({n + ".table", segments}); });
  group("encoder.multimodal", [&](const std::string& n, ParameterList& l) { fusion.append_parameters(n, l); });
  group("pooling", [&](const std::string& n, ParameterList& l) { pooling.append_parameters(n, l); });
  if (bigfive_head) group("head.bigfive", [&](const std::string& n, ParameterList& l) { bigfive_head->append_parameters(n, l); });
  if (hexaco_head) group("head.hexaco", [&](const std::string& n, ParameterList& l) { hexaco_head->append_parameters(n, l); });
  return groups;
}

ParameterList JointModel::parameters() const {
  ParameterList all;
  for (auto& [name, list] : parameter_groups()) all.insert(all.end(), list.begin(), list.end());
  return all;
}

std::size_t JointModel::copy_parameters_from(const JointModel& other) {
  std::map<std::string, Tensor> source;
  for (const auto& p : other.parameters()) source.emplace(p.name, p.tensor);
  std::size_t copied = 0;
  for (auto& p : parameters()) {
    auto it = source.find(p.name);
    if (it == source.end() || it->second.shape() != p.tensor.shape()) continue;
    auto dst = p.tensor.mutable_data();
    std::copy(it->second.data().begin(), it->second.data().end(), dst.begin());
    ++copied;
  }
  return copied;
}

void JointModel::zero_grad() {
  for (auto& p : parameters()) p.tensor.zero_grad();
}

}  // namespace persona
