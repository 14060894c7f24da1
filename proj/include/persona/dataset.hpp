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

#ifndef PERSONA_DATASET_HPP
#define PERSONA_DATASET_HPP

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "persona/model.hpp"
#include "persona/traits.hpp"

namespace persona {

enum class Split { train, val, test };

std::string_view split_name(Split s);
Split parse_split(std::string_view name);

/// One video: features plus normalised ground truth for both inventories.
struct Sample {
  std::string id;
  std::string person;
  Split split = Split::train;
  ModalityFeatures features;
  BigFive bigfive{};
  Hexaco hexaco{};

  TraitValues labels() const { return {bigfive, hexaco}; }
};

std::vector<Sample> select_split(std::span<const Sample> samples, Split split);

/// Keeps only the listed modalities of every sample.
std::vector<Sample> restrict_modalities(std::span<const Sample> samples, ModalitySet keep);

// Feature tensor files: "MMPT", u8 version, u32 rank, u32 extents,
// little-endian float32 payload in row-major order.
void write_feature_file(const std::filesystem::path& path, const Tensor& t);
Tensor read_feature_file(const std::filesystem::path& path);
/// Rounds every value through float32, matching what the file format stores.
Tensor round_to_float32(const Tensor& t);

/// One manifest line (JSON object) per sample. Feature paths are relative to
/// the manifest's directory.
struct ManifestRecord {
  std::string id;
  std::string person;
  Split split = Split::train;
  std::string audio_path;
  std::string visual_path;
  std::string text_path;
  BigFive bigfive{};
  Hexaco hexaco{};
};

std::string manifest_line(const ManifestRecord& record);
ManifestRecord parse_manifest_line(std::string_view line);

void write_manifest(const std::filesystem::path& path, std::span<const ManifestRecord> records);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

/// Reads the manifest and every referenced feature file.
std::vector<Sample> load_dataset(const std::filesystem::path& manifest);

}  // namespace persona

#endif  // PERSONA_DATASET_HPP
