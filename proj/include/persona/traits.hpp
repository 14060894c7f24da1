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

#ifndef PERSONA_TRAITS_HPP
#define PERSONA_TRAITS_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace persona {

inline constexpr std::size_t kBigFiveTraits = 5;
inline constexpr std::size_t kHexacoTraits = 6;
inline constexpr std::size_t kAllTraits = kBigFiveTraits + kHexacoTraits;

// Output order of the two heads.
inline constexpr std::array<std::string_view, kBigFiveTraits> kBigFiveKeys{"O", "C", "E", "A", "N"};
inline constexpr std::array<std::string_view, kHexacoTraits> kHexacoKeys{"H", "E", "X", "A", "C", "O"};

inline constexpr std::array<std::string_view, kBigFiveTraits> kBigFiveNames{
    "Openness", "Conscientiousness", "Extraversion", "Agreeableness", "Neuroticism"};
inline constexpr std::array<std::string_view, kHexacoTraits> kHexacoNames{
    "Honesty-Humility", "Emotionality",      "Extraversion",
    "Agreeableness",    "Conscientiousness", "Openness"};

enum class Head { bigfive, hexaco };

inline std::string_view head_name(Head h) { return h == Head::bigfive ? "bigfive" : "hexaco"; }

inline std::size_t head_width(Head h) { return h == Head::bigfive ? kBigFiveTraits : kHexacoTraits; }

inline std::span<const std::string_view> head_keys(Head h) {
  if (h == Head::bigfive) return kBigFiveKeys;
  return kHexacoKeys;
}

inline std::span<const std::string_view> head_trait_names(Head h) {
  if (h == Head::bigfive) return kBigFiveNames;
  return kHexacoNames;
}

using BigFive = std::array<double, kBigFiveTraits>;
using Hexaco = std::array<double, kHexacoTraits>;

/// Plain-value predictions or labels for one video; a missing head is empty.
struct TraitValues {
  std::optional<BigFive> bigfive;
  std::optional<Hexaco> hexaco;
};

}  // namespace persona

#endif  // PERSONA_TRAITS_HPP
