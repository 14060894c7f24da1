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

#include "persona/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "persona/errors.hpp"

namespace persona::scoring {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct InventoryShape {
  std::size_t items;
  std::vector<std::string> traits;
};

const InventoryShape* known_inventory(std::string_view name) {
  static const InventoryShape hexaco{60, {"H", "E", "X", "A", "C", "O"}};
  static const InventoryShape bigfive{50, {"O", "C", "E", "A", "N"}};
  if (name == "hexaco60") return &hexaco;
  if (name == "bigfive50") return &bigfive;
  return nullptr;
}

// Splits one CSV line; fields may be double-quoted with "" escapes.
std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::string(trim(field)));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(std::string(trim(field)));
  return out;
}

Inventory build(std::string name, std::vector<std::string> traits, std::size_t count,
                const std::vector<std::string>& cycle,
                const std::vector<QuestionnaireItem>& printed) {
  Inventory inv;
  inv.name = std::move(name);
  inv.traits = std::move(traits);
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < count; ++i) {
    QuestionnaireItem item;
    item.id = static_cast<int>(i + 1);
    item.trait = cycle[i % cycle.size()];
    const int k = seen[item.trait]++;
    item.polarity = (k % 2 == 0) ? Polarity::positive : Polarity::negative;
    inv.items.push_back(std::move(item));
  }
  for (const auto& p : printed) inv.items[static_cast<std::size_t>(p.id - 1)] = p;
  return inv;
}

}  // namespace

Likert parse_likert(std::string_view label) {
  const std::string l = lower(trim(label));
  if (l == "very inaccurate" || l == "vi" || l == "1") return Likert::very_inaccurate;
  if (l == "moderately inaccurate" || l == "mi" || l == "2") return Likert::moderately_inaccurate;
  if (l == "neither inaccurate nor accurate" || l == "neither" || l == "n" || l == "3") {
    return Likert::neither;
  }
  if (l == "moderately accurate" || l == "ma" || l == "4") return Likert::moderately_accurate;
  if (l == "very accurate" || l == "va" || l == "5") return Likert::very_accurate;
  throw ParseError("unknown response label '" + std::string(label) + "'");
}

std::string_view likert_label(Likert l) {
  switch (l) {
    case Likert::very_inaccurate:
      return "Very Inaccurate";
    case Likert::moderately_inaccurate:
      return "Moderately Inaccurate";
    case Likert::neither:
      return "Neither Inaccurate nor Accurate";
    case Likert::moderately_accurate:
      return "Moderately Accurate";
    case Likert::very_accurate:
      return "Very Accurate";
  }
  return "?";
}

int item_value(Polarity polarity, Likert response) {
  const int v = static_cast<int>(response);
  return polarity == Polarity::positive ? v : 6 - v;
}

void Inventory::validate() const {
  if (traits.empty()) throw ConfigError("inventory " + name + " lists no traits");
  std::set<std::string> trait_set(traits.begin(), traits.end());
  if (trait_set.size() != traits.size()) throw ConfigError("inventory " + name + " repeats a trait");
  std::set<int> ids;
  std::map<std::string, int> per_trait;
  for (const auto& item : items) {
    if (item.id <= 0) throw ConfigError("inventory " + name + ": item ids must be positive");
    if (!ids.insert(item.id).second) {
      throw ConfigError("inventory " + name + ": duplicate item id " + std::to_string(item.id));
    }
    if (!trait_set.count(item.trait)) {
      throw ConfigError("inventory " + name + ": item " + std::to_string(item.id) +
                        " keyed to unknown trait '" + item.trait + "'");
    }
    ++per_trait[item.trait];
  }
  for (const auto& t : traits) {
    if (!per_trait.count(t)) throw ConfigError("inventory " + name + ": trait " + t + " has no items");
  }
  if (const auto* shape = known_inventory(name)) {
    if (items.size() != shape->items || traits != shape->traits) {
      throw ConfigError("inventory " + name + " must have " + std::to_string(shape->items) +
                        " items over traits in canonical order");
    }
  }
}

const QuestionnaireItem& Inventory::item(int id) const {
  for (const auto& i : items)
    if (i.id == id) return i;
  throw ParseError("inventory " + name + " has no item " + std::to_string(id));
}

Inventory Inventory::hexaco60() {
  using P = Polarity;
  // The printed items follow the inventory's O, C, A, X, E, H rotation.
  const std::vector<QuestionnaireItem> printed{
      {1, "O", P::negative, "He/she would be quite bored by a visit to an art gallery."},
      {2, "C", P::positive, "He/she plans ahead and organizes things, to avoid scrambling at the last minute."},
      {3, "A", P::positive, "He/she rarely holds a grudge, even against people who have badly wronged him/her."},
      {4, "X", P::positive, "He/she feels reasonably satisfied with himself/herself overall."},
      {5, "E", P::positive, "He/she would feel afraid if he/she had to travel in bad weather conditions."},
      {6, "H", P::positive, "He/she wouldn't use flattery to get a raise or promotion at work, even if he/she thought it would succeed."},
      {55, "O", P::negative, "He/she finds it boring to discuss philosophy."},
      {56, "C", P::negative, "He/she prefers to do whatever comes to mind, rather than stick to a plan."},
      {57, "A", P::negative, "When people tell him/her that he/she is wrong, his/her first reaction is to argue with them."},
      {58, "X", P::positive, "When he/she is in a group of people, he/she is often the one who speaks on behalf of the group."},
      {59, "E", P::negative, "He/she remains unemotional even in situations where most people get very sentimental."},
      {60, "H", P::negative, "He/she'd be tempted to use counterfeit money, if he/she were sure he/she could get away with it."},
  };
  return build("hexaco60", {"H", "E", "X", "A", "C", "O"}, 60, {"O", "C", "A", "X", "E", "H"}, printed);
}

Inventory Inventory::bigfive50() {
  return build("bigfive50", {"O", "C", "E", "A", "N"}, 50, {"E", "A", "C", "N", "O"}, {});
}

Inventory Inventory::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed inventory: ") + e.what());
  }
  Inventory inv;
  try {
    inv.name = j.at("name").get<std::string>();
    inv.traits = j.at("traits").get<std::vector<std::string>>();
    for (const auto& it : j.at("items")) {
      QuestionnaireItem item;
      item.id = it.at("id").get<int>();
      item.trait = it.at("trait").get<std::string>();
      const auto key = it.at("key").get<std::string>();
      if (key == "+") {
        item.polarity = Polarity::positive;
      } else if (key == "-") {
        item.polarity = Polarity::negative;
      } else {
        throw ParseError("item " + std::to_string(item.id) + " has key '" + key + "' (expected + or -)");
      }
      item.text = it.value("text", std::string());
      inv.items.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("inventory schema error: ") + e.what());
  }
  inv.validate();
  return inv;
}

Inventory Inventory::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open inventory " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json(ss.str());
}

std::string Inventory::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["traits"] = traits;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& item : items) {
    nlohmann::ordered_json it;
    it["id"] = item.id;
    it["trait"] = item.trait;
    it["key"] = item.polarity == Polarity::positive ? "+" : "-";
    it["text"] = item.text;
    arr.push_back(std::move(it));
  }
  j["items"] = std::move(arr);
  return j.dump(2) + "\n";
}

double TraitScores::operator[](std::string_view trait) const {
  for (std::size_t i = 0; i < traits.size(); ++i)
    if (traits[i] == trait) return values[i];
  throw Error("no trait '" + std::string(trait) + "' in " + inventory + " scores");
}

TraitScores scale_score(const ResponseSheet& sheet, const Inventory& inventory) {
  std::vector<int> missing;
  for (const auto& item : inventory.items)
    if (!sheet.answers.count(item.id)) missing.push_back(item.id);
  if (!missing.empty()) {
    std::string ids;
    for (auto id : missing) ids += (ids.empty() ? "" : ",") + std::to_string(id);
    throw CompletenessError("observer " + sheet.observer_id + " on video " + sheet.video_id +
                            " is missing items " + ids);
  }
  for (const auto& [id, _] : sheet.answers) inventory.item(id);

  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& item : inventory.items) {
    auto& [total, n] = acc[item.trait];
    total += item_value(item.polarity, sheet.answers.at(item.id));
    ++n;
  }
  TraitScores out;
  out.inventory = inventory.name;
  out.traits = inventory.traits;
  for (const auto& t : inventory.traits) {
    const auto& [total, n] = acc.at(t);
    out.values.push_back(total / n);
  }
  return out;
}

TraitScores aggregate_observers(std::span<const TraitScores> sheets) {
  if (sheets.empty()) throw Error("aggregate_observers: no observer scores");
  TraitScores out = sheets.front();
  std::fill(out.values.begin(), out.values.end(), 0.0);
  for (const auto& s : sheets) {
    if (s.inventory != out.inventory || s.traits != out.traits || s.normalized != out.normalized) {
      throw Error("aggregate_observers: mixed inventories (" + out.inventory + " vs " + s.inventory + ")");
    }
    for (std::size_t i = 0; i < s.values.size(); ++i) out.values[i] += s.values[i];
  }
  for (auto& v : out.values) v /= static_cast<double>(sheets.size());
  return out;
}

TraitScores normalize(const TraitScores& raw) {
  if (raw.normalized) throw Error("scores are already normalised");
  TraitScores out = raw;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double x = raw.values[i];
    if (!(x >= 1.0 && x <= 5.0)) {
      throw RangeError("raw score " + std::to_string(x) + " for trait " + raw.traits[i] + " outside [1, 5]");
    }
    out.values[i] = (x - 1.0) / 4.0;
  }
  out.normalized = true;
  return out;
}

TraitScores denormalize(const TraitScores& normalized) {
  if (!normalized.normalized) throw Error("scores are not normalised");
  TraitScores out = normalized;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double x = normalized.values[i];
    if (!(x >= 0.0 && x <= 1.0)) {
      throw RangeError("normalised score " + std::to_string(x) + " outside [0, 1]");
    }
    out.values[i] = 1.0 + 4.0 * x;
  }
  out.normalized = false;
  return out;
}

std::vector<Annotation> read_annotations(std::istream& in, std::string_view source) {
  std::vector<Annotation> rows;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() != 4 || lower(fields[0]) != "observer_id" || lower(fields[1]) != "video_id" ||
          lower(fields[2]) != "item_id" || lower(fields[3]) != "response") {
        throw ParseError(std::string(source) + ": header must be observer_id,video_id,item_id,response");
      }
      continue;
    }
    if (fields.size() != 4) {
      throw ParseError(std::string(source) + ":" + std::to_string(lineno) + ": expected 4 fields");
    }
    Annotation a;
    a.observer_id = fields[0];
    a.video_id = fields[1];
    try {
      std::size_t used = 0;
      a.item_id = std::stoi(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(std::string(source) + ":" + std::to_string(lineno) + ": bad item id '" + fields[2] + "'");
    }
    a.response = parse_likert(fields[3]);
    rows.push_back(std::move(a));
  }
  return rows;
}

std::vector<Annotation> read_annotations(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open annotations " + path.string());
  return read_annotations(is, path.string());
}

std::vector<VideoScores> score_annotations(std::span<const Annotation> rows, const Inventory& inventory) {
  std::vector<std::string> videos;
  std::map<std::string, std::vector<std::string>> observers_of;
  std::map<std::pair<std::string, std::string>, ResponseSheet> sheets;
  for (const auto& r : rows) {
    auto key = std::make_pair(r.video_id, r.observer_id);
    auto [it, inserted] = sheets.try_emplace(key);
    if (inserted) {
      it->second.observer_id = r.observer_id;
      it->second.video_id = r.video_id;
      if (!observers_of.count(r.video_id)) videos.push_back(r.video_id);
      observers_of[r.video_id].push_back(r.observer_id);
    }
    if (!it->second.answers.emplace(r.item_id, r.response).second) {
      throw ParseError("observer " + r.observer_id + " answered item " + std::to_string(r.item_id) +
                       " twice for video " + r.video_id);
    }
  }
  std::vector<VideoScores> out;
  for (const auto& v : videos) {
    std::vector<TraitScores> per_observer;
    for (const auto& o : observers_of[v]) per_observer.push_back(scale_score(sheets.at({v, o}), inventory));
    out.push_back({v, normalize(aggregate_observers(per_observer))});
  }
  return out;
}

}  // namespace persona::scoring
