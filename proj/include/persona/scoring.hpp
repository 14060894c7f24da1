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

#ifndef PERSONA_SCORING_HPP
#define PERSONA_SCORING_HPP

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace persona::scoring {

enum class Polarity { positive, negative };

/// Five-point response scale, ordered from "Very Inaccurate" to "Very Accurate".
enum class Likert {
  very_inaccurate = 1,
  moderately_inaccurate,
  neither,
  moderately_accurate,
  very_accurate,
};

inline constexpr Likert kAllLabels[] = {Likert::very_inaccurate, Likert::moderately_inaccurate,
                                        Likert::neither, Likert::moderately_accurate,
                                        Likert::very_accurate};

/// Accepts the full labels ("Very Inaccurate", "Neither Inaccurate nor
/// Accurate", ...), the short form "Neither", and the abbreviations
/// VI, MI, N, MA, VA. Case-insensitive. Throws ParseError otherwise.
Likert parse_likert(std::string_view label);
std::string_view likert_label(Likert l);

/// '+' keyed: VI..VA -> 1..5. '-' keyed: VI..VA -> 5..1.
int item_value(Polarity polarity, Likert response);

struct QuestionnaireItem {
  int id = 0;
  std::string trait;  // single-letter key of the owning inventory
  Polarity polarity = Polarity::positive;
  std::string text;
};

struct Inventory {
  std::string name;                 // "bigfive50" or "hexaco60"
  std::vector<std::string> traits;  // output order
  std::vector<QuestionnaireItem> items;

  /// Unique ids, valid trait keys, every trait keyed by at least one item,
  /// and the item/trait counts of the named inventory.
  void validate() const;
  const QuestionnaireItem& item(int id) const;

  /// 60 items over H,E,X,A,C,O. Items 1-6 and 55-60 carry the printed
  /// statements; the rest are keyed placeholders.
  static Inventory hexaco60();
  /// 50 keyed placeholder items over O,C,E,A,N.
  static Inventory bigfive50();

  /// JSON: {"name": ..., "traits": [...], "items": [{"id", "trait", "key": "+"|"-", "text"}]}
  static Inventory load(const std::filesystem::path& path);
  static Inventory from_json(std::string_view text);
  std::string to_json() const;
};

struct ResponseSheet {
  std::string observer_id;
  std::string video_id;
  std::map<int, Likert> answers;
};

struct TraitScores {
  std::string inventory;
  std::vector<std::string> traits;
  std::vector<double> values;
  bool normalized = false;

  double operator[](std::string_view trait) const;
};

/// Per-trait mean of item values. Throws CompletenessError listing any
/// missing item ids, ParseError for answers to unknown items.
TraitScores scale_score(const ResponseSheet& sheet, const Inventory& inventory);

/// Per-trait arithmetic mean across observers of one video.
TraitScores aggregate_observers(std::span<const TraitScores> sheets);

/// (x - 1) / 4 per trait; RangeError outside [1, 5].
TraitScores normalize(const TraitScores& raw);
/// 1 + 4x per trait; RangeError outside [0, 1].
TraitScores denormalize(const TraitScores& normalized);

/// One row of an annotation CSV.
struct Annotation {
  std::string observer_id;
  std::string video_id;
  int item_id = 0;
  Likert response = Likert::neither;
};

/// CSV with header observer_id,video_id,item_id,response.
std::vector<Annotation> read_annotations(std::istream& in, std::string_view source = "annotations");
std::vector<Annotation> read_annotations(const std::filesystem::path& path);

struct VideoScores {
  std::string video_id;
  TraitScores scores;  // normalised, aggregated over observers
};

/// Groups annotations into per-observer sheets, scores each, averages the
/// observers of each video and normalises. Videos appear in order of first
/// mention.
std::vector<VideoScores> score_annotations(std::span<const Annotation> rows, const Inventory& inventory);

}  // namespace persona::scoring

#endif  // PERSONA_SCORING_HPP
