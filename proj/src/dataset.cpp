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

#include "persona/dataset.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "binary_io.hpp"

namespace persona {

namespace {

constexpr char kFeatureMagic[4] = {'M', 'M', 'P', 'T'};
constexpr std::uint8_t kFeatureVersion = 1;

template <std::size_t N>
std::array<double, N> read_traits(const nlohmann::json& j, const char* key, std::string_view line) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != N) {
    throw ParseError("manifest record needs " + std::to_string(N) + " '" + key +
                     "' values: " + std::string(line));
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!j[key][i].is_number()) throw ParseError(std::string("non-numeric trait value in: ") + std::string(line));
    out[i] = j[key][i].get<double>();
    if (!(out[i] >= 0.0 && out[i] <= 1.0)) {
      throw RangeError(std::string("trait value ") + std::to_string(out[i]) +
                       " outside [0, 1] in manifest record: " + std::string(line));
    }
  }
  return out;
}

}  // namespace

std::string_view split_name(Split s) {
  switch (s) {
    case Split::train:
      return "train";
    case Split::val:
      return "val";
    case Split::test:
      return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw ParseError("unknown split '" + std::string(name) + "' (expected train, val, test)");
}

std::vector<Sample> select_split(std::span<const Sample> samples, Split split) {
  std::vector<Sample> out;
  for (const auto& s : samples)
    if (s.split == split) out.push_back(s);
  return out;
}

std::vector<Sample> restrict_modalities(std::span<const Sample> samples, ModalitySet keep) {
  std::vector<Sample> out(samples.begin(), samples.end());
  for (auto& s : out) {
    if (!keep.audio) s.features.audio.reset();
    if (!keep.text) s.features.text.reset();
    if (!keep.visual) s.features.visual.reset();
    const auto present = s.features.present();
    if (!(present == keep)) {
      throw ConfigError("sample " + s.id + " lacks modalities needed for {" + keep.str() + "}");
    }
  }
  return out;
}

Tensor round_to_float32(const Tensor& t) {
  std::vector<double> v(t.data().begin(), t.data().end());
  for (auto& x : v) x = static_cast<double>(static_cast<float>(x));
  return Tensor::from(t.shape(), std::move(v));
}

void write_feature_file(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(kFeatureMagic, 4);
  binary::put_u8(os, kFeatureVersion);
  binary::put_u32(os, static_cast<std::uint32_t>(t.rank()));
  for (auto e : t.shape()) binary::put_u32(os, static_cast<std::uint32_t>(e));
  for (double v : t.data()) binary::put_f32(os, static_cast<float>(v));
  if (!os) throw IoError("failed writing " + path.string());
}

Tensor read_feature_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  binary::Reader r(is, path.string());
  if (r.bytes(4) != std::string(kFeatureMagic, 4)) throw IoError(path.string() + " is not an MMPT file");
  const auto version = r.u8();
  if (version != kFeatureVersion) {
    throw IoError(path.string() + ": unsupported MMPT version " + std::to_string(version));
  }
  const auto rank = r.u32();
  if (rank > 8) throw IoError(path.string() + ": implausible rank " + std::to_string(rank));
  Shape shape(rank);
  for (auto& e : shape) e = r.u32();
  std::vector<double> values(shape_numel(shape));
  for (auto& v : values) v = static_cast<double>(r.f32());
  if (!r.at_end()) throw IoError(path.string() + ": trailing bytes after payload");
  return Tensor::from(std::move(shape), std::move(values));
}

std::string manifest_line(const ManifestRecord& rec) {
  nlohmann::ordered_json j;
  j["id"] = rec.id;
  j["person"] = rec.person;
  j["split"] = std::string(split_name(rec.split));
  if (!rec.audio_path.empty()) j["audio"] = rec.audio_path;
  if (!rec.text_path.empty()) j["text"] = rec.text_path;
  if (!rec.visual_path.empty()) j["visual"] = rec.visual_path;
  j["bigfive"] = rec.bigfive;
  j["hexaco"] = rec.hexaco;
  return j.dump();
}

ManifestRecord parse_manifest_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed manifest line: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("manifest line is not an object: " + std::string(line));
  auto str = [&](const char* key, bool required) -> std::string {
    if (!j.contains(key)) {
      if (required) throw ParseError(std::string("manifest record lacks '") + key + "': " + std::string(line));
      return {};
    }
    if (!j[key].is_string()) throw ParseError(std::string("'") + key + "' must be a string");
    return j[key].get<std::string>();
  };
  ManifestRecord rec;
  rec.id = str("id", true);
  rec.person = str("person", true);
  rec.split = parse_split(str("split", true));
  rec.audio_path = str("audio", false);
  rec.text_path = str("text", false);
  rec.visual_path = str("visual", false);
  rec.bigfive = read_traits<kBigFiveTraits>(j, "bigfive", line);
  rec.hexaco = read_traits<kHexacoTraits>(j, "hexaco", line);
  return rec;
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestRecord> records) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& r : records) os << manifest_line(r) << '\n';
  if (!os) throw IoError("failed writing " + path.string());
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest " + path.string());
  std::vector<ManifestRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    out.push_back(parse_manifest_line(line));
  }
  return out;
}

std::vector<Sample> load_dataset(const std::filesystem::path& manifest) {
  const auto root = manifest.parent_path();
  std::vector<Sample> out;
  for (const auto& rec : read_manifest(manifest)) {
    Sample s;
    s.id = rec.id;
    s.person = rec.person;
    s.split = rec.split;
    s.bigfive = rec.bigfive;
    s.hexaco = rec.hexaco;
    if (!rec.audio_path.empty()) s.features.audio = read_feature_file(root / rec.audio_path);
    if (!rec.visual_path.empty()) s.features.visual = read_feature_file(root / rec.visual_path);
    if (!rec.text_path.empty()) {
      Tensor ids = read_feature_file(root / rec.text_path);
      std::vector<std::size_t> tokens;
      for (double v : ids.data()) {
        if (v < 0 || v != std::floor(v)) throw IoError(rec.text_path + ": token ids must be non-negative integers");
        tokens.push_back(static_cast<std::size_t>(v));
      }
      s.features.text = std::move(tokens);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace persona
