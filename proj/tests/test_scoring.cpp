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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "persona/errors.hpp"
#include "persona/scoring.hpp"

using namespace persona;
using namespace persona::scoring;

namespace {

ResponseSheet sheet_from_digits(const std::string& digits, std::string observer = "o1") {
  ResponseSheet s;
  s.observer_id = std::move(observer);
  s.video_id = "v1";
  for (std::size_t i = 0; i < digits.size(); ++i) {
    s.answers[static_cast<int>(i + 1)] = static_cast<Likert>(digits[i] - '0');
  }
  return s;
}

ResponseSheet uniform_sheet(const Inventory& inv, Likert l) {
  ResponseSheet s{"o", "v", {}};
  for (const auto& item : inv.items) s.answers[item.id] = l;
  return s;
}

}  // namespace

TEST(Likert, ParsesLabelsAndAbbreviations) {
  EXPECT_EQ(parse_likert("Very Accurate"), Likert::very_accurate);
  EXPECT_EQ(parse_likert("  very inaccurate "), Likert::very_inaccurate);
  EXPECT_EQ(parse_likert("Neither Inaccurate nor Accurate"), Likert::neither);
  EXPECT_EQ(parse_likert("Neither"), Likert::neither);
  EXPECT_EQ(parse_likert("MA"), Likert::moderately_accurate);
  EXPECT_EQ(parse_likert("mi"), Likert::moderately_inaccurate);
  EXPECT_THROW(parse_likert("Somewhat"), ParseError);
  for (auto l : kAllLabels) EXPECT_EQ(parse_likert(likert_label(l)), l);
}

TEST(ItemValue, KeyedExamples) {
  EXPECT_EQ(item_value(Polarity::positive, Likert::very_accurate), 5);
  EXPECT_EQ(item_value(Polarity::negative, Likert::very_accurate), 1);
  EXPECT_EQ(item_value(Polarity::positive, Likert::neither), 3);
  EXPECT_EQ(item_value(Polarity::negative, Likert::neither), 3);
}

TEST(ItemValue, ReversalSumsToSix) {
  for (auto l : kAllLabels) EXPECT_EQ(item_value(Polarity::positive, l) + item_value(Polarity::negative, l), 6);
}

TEST(Inventory, TemplatesAreValid) {
  const auto hex = Inventory::hexaco60();
  const auto bf = Inventory::bigfive50();
  EXPECT_NO_THROW(hex.validate());
  EXPECT_NO_THROW(bf.validate());
  EXPECT_EQ(hex.items.size(), 60u);
  EXPECT_EQ(bf.items.size(), 50u);
  EXPECT_EQ(hex.traits, (std::vector<std::string>{"H", "E", "X", "A", "C", "O"}));
  EXPECT_EQ(bf.traits, (std::vector<std::string>{"O", "C", "E", "A", "N"}));
  for (const auto& t : hex.traits) {
    EXPECT_EQ(std::count_if(hex.items.begin(), hex.items.end(), [&](const auto& i) { return i.trait == t; }), 10);
  }
}

TEST(Inventory, PrintedItemsKeepTheirKeys) {
  const auto hex = Inventory::hexaco60();
  EXPECT_EQ(hex.item(1).trait, "O");
  EXPECT_EQ(hex.item(1).polarity, Polarity::negative);
  EXPECT_EQ(hex.item(6).trait, "H");
  EXPECT_EQ(hex.item(6).polarity, Polarity::positive);
  EXPECT_EQ(hex.item(58).trait, "X");
  EXPECT_EQ(hex.item(58).polarity, Polarity::positive);
  EXPECT_EQ(hex.item(60).polarity, Polarity::negative);
  EXPECT_FALSE(hex.item(57).text.empty());
  EXPECT_TRUE(hex.item(30).text.empty());
}

TEST(Inventory, KeysAgreeWithIndependentLayout) {
  for (const auto& [inv, keys] : {std::pair{Inventory::hexaco60(), oracle::hexaco_keys()},
                                  std::pair{Inventory::bigfive50(), oracle::bigfive_keys()}}) {
    for (const auto& item : inv.items) {
      EXPECT_EQ(item.trait, keys.at(item.id).trait) << inv.name << " item " << item.id;
      EXPECT_EQ(item.polarity == Polarity::positive ? 1 : -1, keys.at(item.id).sign) << inv.name << " item " << item.id;
    }
  }
}

TEST(Inventory, JsonRoundTripAndShippedFiles) {
  for (const auto& inv : {Inventory::hexaco60(), Inventory::bigfive50()}) {
    const auto back = Inventory::from_json(inv.to_json());
    EXPECT_EQ(back.to_json(), inv.to_json());
    std::ifstream is(std::string(PERSONA_SOURCE_DIR) + "/data/inventories/" + inv.name + ".json");
    ASSERT_TRUE(is) << inv.name;
    std::stringstream ss;
    ss << is.rdbuf();
    EXPECT_EQ(ss.str(), inv.to_json()) << inv.name;
  }
}

TEST(Inventory, RejectsMalformedDefinitions) {
  EXPECT_THROW(Inventory::from_json("{"), ParseError);
  EXPECT_THROW(Inventory::from_json(R"({"name":"x","traits":["A"],"items":[{"id":1,"trait":"A","key":"?"}]})"),
               ParseError);
  EXPECT_THROW(Inventory::from_json(R"({"name":"x","traits":["A"],"items":[{"id":1,"trait":"B","key":"+"}]})"),
               ConfigError);
  EXPECT_THROW(Inventory::from_json(R"({"name":"x","traits":["A","B"],"items":[{"id":1,"trait":"A","key":"+"}]})"),
               ConfigError);
  EXPECT_THROW(Inventory::from_json(
                   R"({"name":"x","traits":["A"],"items":[{"id":1,"trait":"A","key":"+"},{"id":1,"trait":"A","key":"-"}]})"),
               ConfigError);
  auto hex = Inventory::hexaco60();
  hex.items.pop_back();
  EXPECT_THROW(hex.validate(), ConfigError);
}

TEST(ScaleScore, UniformAndMaximalSheets) {
  for (const auto& inv : {Inventory::hexaco60(), Inventory::bigfive50()}) {
    for (double v : scale_score(uniform_sheet(inv, Likert::neither), inv).values) EXPECT_EQ(v, 3.0);
    ResponseSheet keyed{"o", "v", {}};
    for (const auto& item : inv.items) {
      keyed.answers[item.id] = item.polarity == Polarity::positive ? Likert::very_accurate : Likert::very_inaccurate;
    }
    for (double v : scale_score(keyed, inv).values) EXPECT_EQ(v, 5.0);
  }
}

TEST(ScaleScore, Crafted60ItemSheet) {
  const auto inv = Inventory::hexaco60();
  const auto scores = scale_score(sheet_from_digits("324115135152114412154151251554121523425153521552315151524543"), inv);
  EXPECT_EQ(scores["H"], 17.0 / 5);
  EXPECT_EQ(scores["E"], 13.0 / 5);
  EXPECT_EQ(scores["X"], 29.0 / 10);
  EXPECT_EQ(scores["A"], 17.0 / 5);
  EXPECT_EQ(scores["C"], 27.0 / 10);
  EXPECT_EQ(scores["O"], 3.0);
}

TEST(ScaleScore, Crafted50ItemSheet) {
  const auto inv = Inventory::bigfive50();
  const auto scores = scale_score(sheet_from_digits("45433222153543435115423244115533354541134113543431"), inv);
  EXPECT_EQ(scores["O"], 31.0 / 10);
  EXPECT_EQ(scores["C"], 18.0 / 5);
  EXPECT_EQ(scores["E"], 3.0);
  EXPECT_EQ(scores["A"], 31.0 / 10);
  EXPECT_EQ(scores["N"], 7.0 / 2);
}

TEST(ScaleScore, MatchesSpreadsheetOracleOnRandomSheets) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> label(1, 5);
  for (const auto& [inv, keys] : {std::pair{Inventory::hexaco60(), oracle::hexaco_keys()},
                                  std::pair{Inventory::bigfive50(), oracle::bigfive_keys()}}) {
    for (int trial = 0; trial < 50; ++trial) {
      std::map<int, int> raw;
      ResponseSheet s{"o", "v", {}};
      for (const auto& item : inv.items) {
        raw[item.id] = label(rng);
        s.answers[item.id] = static_cast<Likert>(raw[item.id]);
      }
      const auto expected = oracle::trait_means(keys, raw);
      const auto got = scale_score(s, inv);
      for (const auto& t : inv.traits) {
        EXPECT_DOUBLE_EQ(got[t], expected.at(t));
        EXPECT_GE(got[t], 1.0);
        EXPECT_LE(got[t], 5.0);
      }
    }
  }
}

TEST(ScaleScore, IncompleteSheetListsMissingIds) {
  const auto inv = Inventory::bigfive50();
  auto s = uniform_sheet(inv, Likert::neither);
  s.answers.erase(7);
  s.answers.erase(42);
  try {
    scale_score(s, inv);
    FAIL();
  } catch (const CompletenessError& e) {
    EXPECT_NE(std::string(e.what()).find("7,42"), std::string::npos) << e.what();
  }
  auto extra = uniform_sheet(inv, Likert::neither);
  extra.answers[99] = Likert::neither;
  EXPECT_THROW(scale_score(extra, inv), ParseError);
}

TEST(Aggregate, ObserverMeans) {
  const auto inv = Inventory::bigfive50();
  const auto one = scale_score(uniform_sheet(inv, Likert::moderately_accurate), inv);
  const TraitScores single[] = {one};
  EXPECT_EQ(aggregate_observers(single).values, one.values);

  TraitScores a{"bigfive50", inv.traits, {2, 2, 2, 2, 2}, false};
  TraitScores b{"bigfive50", inv.traits, {4, 4, 4, 4, 4}, false};
  const TraitScores pair[] = {a, b};
  for (double v : aggregate_observers(pair).values) EXPECT_EQ(v, 3.0);

  const std::string sheets[] = {"43251412322444124453245343422122221452331245355325",
                                "51454444144121242135111525135112542335341144443121",
                                "33425125325153135323255532522422543113432534331212",
                                "42324551431142424314441222125425543255211152422132",
                                "35253354213455452525514251222451513555415122311545"};
  std::vector<TraitScores> per_observer;
  for (const auto& s : sheets) per_observer.push_back(scale_score(sheet_from_digits(s), inv));
  const auto agg = aggregate_observers(per_observer);
  EXPECT_NEAR(agg["O"], 151.0 / 50, 1e-15);
  EXPECT_NEAR(agg["C"], 83.0 / 25, 1e-15);
  EXPECT_NEAR(agg["E"], 72.0 / 25, 1e-15);
  EXPECT_NEAR(agg["A"], 67.0 / 25, 1e-15);
  EXPECT_NEAR(agg["N"], 163.0 / 50, 1e-15);

  std::reverse(per_observer.begin(), per_observer.end());
  const auto reversed = aggregate_observers(per_observer);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(reversed.values[k], agg.values[k], 1e-14);
}

TEST(Normalize, EndpointsAndRoundTrip) {
  TraitScores raw{"x", {"a", "b", "c"}, {1.0, 3.0, 5.0}, false};
  const auto n = normalize(raw);
  EXPECT_EQ(n.values, (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_TRUE(n.normalized);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(1.0, 5.0);
  double prev_in = 0, prev_out = -1;
  for (int i = 0; i < 200; ++i) {
    TraitScores s{"x", {"a"}, {u(rng)}, false};
    const double back = denormalize(normalize(s)).values[0];
    EXPECT_NEAR(back, s.values[0], 1e-15);
    if (s.values[0] > prev_in) EXPECT_GT(normalize(s).values[0], prev_out);
    prev_in = s.values[0];
    prev_out = normalize(s).values[0];
  }
  TraitScores bad{"x", {"a"}, {5.5}, false};
  EXPECT_THROW(normalize(bad), RangeError);
}

TEST(Annotations, CsvToVideoScores) {
  const auto inv = Inventory::bigfive50();
  std::ostringstream csv;
  csv << "observer_id,video_id,item_id,response\n";
  for (const char* obs : {"a", "b"}) {
    for (const auto& item : inv.items) csv << obs << ",vid1," << item.id << ",Neither\n";
  }
  for (const auto& item : inv.items) csv << "a,vid2," << item.id << ",\"Very Accurate\"\n";
  std::istringstream in(csv.str());
  const auto rows = read_annotations(in);
  EXPECT_EQ(rows.size(), 150u);
  const auto videos = score_annotations(rows, inv);
  ASSERT_EQ(videos.size(), 2u);
  EXPECT_EQ(videos[0].video_id, "vid1");
  for (double v : videos[0].scores.values) EXPECT_EQ(v, 0.5);
  // Half the items are reverse keyed: (5 + 1) / 2 = 3 -> 0.5.
  for (double v : videos[1].scores.values) EXPECT_EQ(v, 0.5);
}

TEST(Annotations, RejectsBadInput) {
  std::istringstream bad_header("who,what\n");
  EXPECT_THROW(read_annotations(bad_header), ParseError);
  std::istringstream bad_label("observer_id,video_id,item_id,response\na,v,1,Maybe\n");
  EXPECT_THROW(read_annotations(bad_label), ParseError);
  std::istringstream bad_id("observer_id,video_id,item_id,response\na,v,x1,VA\n");
  EXPECT_THROW(read_annotations(bad_id), ParseError);
  std::istringstream dup("observer_id,video_id,item_id,response\na,v,1,VA\na,v,1,VI\n");
  const auto rows = read_annotations(dup);
  EXPECT_THROW(score_annotations(rows, Inventory::bigfive50()), ParseError);
}
