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

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "persona/errors.hpp"
#include "persona/evaluation.hpp"

using namespace persona;

namespace {

std::vector<double> uniform(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u;
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

std::vector<Sample> labelled(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  std::vector<Sample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].id = "v" + std::to_string(i);
    for (auto& v : out[i].bigfive) v = u(rng);
    for (auto& v : out[i].hexaco) v = u(rng);
  }
  return out;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Accuracy, HandExamples) {
  const std::vector<double> p{0.2, 0.6, 0.9, 0.5}, t{0.4, 0.3, 0.8, 0.5};
  EXPECT_NEAR(accuracy_k(p, t), 0.85, 1e-15);
  const std::vector<double> half{0.5, 0.5}, ends{0.0, 1.0};
  EXPECT_NEAR(accuracy_k(half, ends), 0.5, 1e-15);
  const std::vector<double> a{0.0, 1.0, 0.5, 0.25}, b{0.25, 0.75, 0.75, 0.0};
  EXPECT_NEAR(accuracy_k(a, b), 0.75, 1e-15);
  EXPECT_EQ(accuracy_k(t, t), 1.0);
  EXPECT_NEAR(accuracy_k(std::vector<double>{0.2, 0.4}, std::vector<double>{0.3, 0.8}), 0.75, 1e-15);
}

TEST(Accuracy, RejectsBadInput) {
  const std::vector<double> a{0.1, 0.2}, b{0.1};
  EXPECT_THROW(accuracy_k(a, b), ShapeError);
  EXPECT_THROW(accuracy_k(std::vector<double>{}, std::vector<double>{}), ShapeError);
  const std::vector<double> over{1.2, 0.0};
  EXPECT_THROW(accuracy_k(over, a), RangeError);
}

TEST(Accuracy, AgreesWithOracleAndIsSymmetric) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = uniform(1 + rng() % 50, rng);
    const auto t = uniform(p.size(), rng);
    EXPECT_NEAR(accuracy_k(p, t), oracle::accuracy(p, t), 1e-12);
    EXPECT_NEAR(accuracy_k(p, t), accuracy_k(t, p), 1e-15);
    const double acc = accuracy_k(p, t);
    EXPECT_GE(acc, 0.0);
    EXPECT_LE(acc, 1.0);
  }
}

TEST(Pearson, HandExample) {
  const std::vector<double> x{1, 2, 3, 4, 5}, y{2, 4, 5, 4, 5};
  EXPECT_NEAR(pearson(x, y), 6.0 / std::sqrt(60.0), 1e-15);
  EXPECT_NEAR(pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}), 0.8, 1e-15);
  const std::vector<double> a{1, 2, 3}, b{3, 2, 1};
  EXPECT_NEAR(pearson(a, b), -1.0, 1e-15);
  const std::vector<double> c{0.2, 0.1, 0.4, 0.3}, d{0.1, 0.3, 0.2, 0.4};
  // centred: (-.05,-.15,.15,.05) and (-.15,.05,-.05,.15), orthogonal
  EXPECT_NEAR(pearson(c, d), 0.0, 1e-12);
}

TEST(Pearson, OracleSymmetryAndAffineInvariance) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = uniform(3 + rng() % 60, rng);
    auto y = uniform(x.size(), rng);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = 0.5 * y[i] + 0.5 * x[i];
    const double r = pearson(x, y);
    EXPECT_NEAR(r, oracle::pearson(x, y), 1e-12);
    EXPECT_NEAR(r, pearson(y, x), 1e-15);
    std::vector<double> z(x.size()), w(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      z[i] = 3.0 * x[i] - 7.0;
      w[i] = -0.5 * x[i] + 2.0;
    }
    EXPECT_NEAR(pearson(z, y), r, 1e-12);
    EXPECT_NEAR(pearson(w, y), -r, 1e-12);
    EXPECT_LE(std::abs(r), 1.0);
  }
}

TEST(Pearson, ConstantSeriesIsUndefined) {
  const std::vector<double> x{1, 2, 3}, c{0.4, 0.4, 0.4};
  try {
    pearson(c, x, "Openness");
    FAIL() << "expected UndefinedCorrelation";
  } catch (const UndefinedCorrelation& e) {
    EXPECT_NE(std::string(e.what()).find("Openness"), std::string::npos);
  }
  EXPECT_THROW(pearson(x, c), NumericError);
  const std::vector<double> one{1.0};
  EXPECT_THROW(pearson(one, one), ShapeError);
}

TEST(CrossMatrix, MatchesBruteForce) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u;
  std::vector<BigFive> b(40);
  std::vector<Hexaco> h(40);
  for (std::size_t n = 0; n < 40; ++n) {
    for (auto& v : b[n]) v = u(rng);
    for (std::size_t j = 0; j < 6; ++j) h[n][j] = 0.3 * u(rng) + 0.7 * b[n][j % 5];
  }
  const auto m = cross_correlation_matrix(b, h);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      std::vector<double> x, y;
      for (std::size_t n = 0; n < 40; ++n) {
        x.push_back(b[n][i]);
        y.push_back(h[n][j]);
      }
      EXPECT_NEAR(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), oracle::pearson(x, y), 1e-12);
    }
  }
  for (auto& row : h) row[2] = 0.5;
  try {
    cross_correlation_matrix(b, h);
    FAIL() << "expected UndefinedCorrelation";
  } catch (const UndefinedCorrelation& e) {
    EXPECT_NE(std::string(e.what()).find("HEXACO X"), std::string::npos);
  }
}

TEST(CrossMatrix, CsvLayout) {
  CrossMatrix m = CrossMatrix::Zero();
  m(0, 5) = 0.25;
  const std::string csv = cross_matrix_csv(m);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), ",H,E,X,A,C,O");
  EXPECT_EQ(count_lines(csv), 6u);
  EXPECT_NE(csv.find("\nO,0,0,0,0,0,0.25\n"), std::string::npos);
  EXPECT_NE(csv.find("\nN,"), std::string::npos);
}

TEST(Evaluate, OraclePredictorIsPerfect) {
  const auto samples = labelled(30, 14);
  const auto report = evaluate(samples, [](const Sample& s) { return s.labels(); }, HeadSet::joint());
  EXPECT_EQ(report.samples, 30u);
  ASSERT_TRUE(report.bigfive && report.hexaco);
  EXPECT_EQ(report.bigfive->correlation.size(), 5u);
  EXPECT_EQ(report.hexaco->accuracy.size(), 6u);
  for (double r : report.hexaco->correlation) EXPECT_NEAR(r, 1.0, 1e-12);
  for (double a : report.bigfive->accuracy) EXPECT_EQ(a, 1.0);
  EXPECT_EQ(report.bigfive->mae, 0.0);
  EXPECT_NEAR(report.hexaco->mean_correlation(), 1.0, 1e-12);
}

TEST(Evaluate, HeadSubsetAndPerTraitValues) {
  const auto samples = labelled(25, 15);
  // Shift one trait; the others stay exact.
  auto shifted = [](const Sample& s) {
    TraitValues v = s.labels();
    (*v.bigfive)[2] = 0.5 * (*v.bigfive)[2];
    return v;
  };
  const auto report = evaluate(samples, shifted, HeadSet{true, false});
  EXPECT_FALSE(report.hexaco.has_value());
  ASSERT_TRUE(report.bigfive);
  std::vector<double> p, t;
  for (const auto& s : samples) {
    p.push_back(0.5 * s.bigfive[2]);
    t.push_back(s.bigfive[2]);
  }
  EXPECT_NEAR(report.bigfive->accuracy[2], oracle::accuracy(p, t), 1e-12);
  EXPECT_NEAR(report.bigfive->correlation[2], 1.0, 1e-12);
  EXPECT_EQ(report.bigfive->accuracy[0], 1.0);
  EXPECT_NEAR(report.bigfive->mae, (1.0 - oracle::accuracy(p, t)) / 5.0, 1e-12);
}

TEST(Evaluate, ConstantPredictorRaises) {
  const auto samples = labelled(10, 16);
  auto constant = [](const Sample&) {
    TraitValues v;
    v.bigfive = BigFive{0.5, 0.5, 0.5, 0.5, 0.5};
    v.hexaco = Hexaco{0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
    return v;
  };
  EXPECT_THROW(evaluate(samples, constant, HeadSet::joint()), UndefinedCorrelation);
}

TEST(Report, CsvAndTextLayout) {
  const auto samples = labelled(20, 17);
  auto report = evaluate(samples, [](const Sample& s) { return s.labels(); }, HeadSet::joint());
  report.model = "joint";
  report.modalities = "audio,visual";
  const std::string csv = report_csv(report);
  EXPECT_EQ(csv.substr(0, csv.find('\n')).rfind("model,modalities,head,metric,", 0), 0u);
  EXPECT_NE(csv.find("joint,\"audio,visual\",bigfive,corr,"), std::string::npos);
  EXPECT_NE(csv.find("joint,\"audio,visual\",hexaco,acc,100"), std::string::npos);
  const std::string text = report_text(report);
  EXPECT_NE(text.find("Corr."), std::string::npos);
  EXPECT_NE(text.find("100.0"), std::string::npos);
}
