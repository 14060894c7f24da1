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

#include "persona/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "persona/config.hpp"
#include "persona/errors.hpp"

namespace persona {

namespace {

std::span<const double> head_values(const TraitValues& v, Head h) {
  if (h == Head::bigfive) {
    if (!v.bigfive) throw Error("prediction lacks the bigfive head");
    return *v.bigfive;
  }
  if (!v.hexaco) throw Error("prediction lacks the hexaco head");
  return *v.hexaco;
}

HeadReport score_head(Head h, std::span<const TraitValues> preds, std::span<const TraitValues> truth) {
  const std::size_t n = preds.size();
  const std::size_t k = head_width(h);
  HeadReport r;
  r.head = h;
  std::vector<double> p(n), t(n);
  double abs_total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = head_values(preds[i], h)[j];
      t[i] = head_values(truth[i], h)[j];
      abs_total += std::abs(p[i] - t[i]);
    }
    r.accuracy.push_back(accuracy_k(p, t));
    r.correlation.push_back(pearson(p, t, std::string(head_name(h)) + " " + std::string(head_keys(h)[j])));
  }
  r.mae = abs_total / static_cast<double>(n * k);
  return r;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

template <typename F>
void for_each_head(const EvalReport& report, F&& f) {
  if (report.bigfive) f(*report.bigfive);
  if (report.hexaco) f(*report.hexaco);
}

}  // namespace

double accuracy_k(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) {
    throw ShapeError("accuracy_k: " + std::to_string(pred.size()) + " predictions vs " +
                     std::to_string(truth.size()) + " targets");
  }
  if (pred.empty()) throw ShapeError("accuracy_k: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(pred[i] >= 0.0 && pred[i] <= 1.0 && truth[i] >= 0.0 && truth[i] <= 1.0)) {
      throw RangeError("accuracy_k: values must lie in [0, 1]");
    }
    total += std::abs(pred[i] - truth[i]);
  }
  return 1.0 - total / static_cast<double>(pred.size());
}

double pearson(std::span<const double> x, std::span<const double> y, std::string_view label) {
  if (x.size() != y.size()) {
    throw ShapeError("pearson: series lengths " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
  }
  if (x.size() < 2) throw ShapeError("pearson: needs at least two points");
  // Decided on the raw values: a computed mean of a constant series need not
  // equal its elements, which would leave tiny nonzero deviations.
  auto constant = [](std::span<const double> s) {
    return std::all_of(s.begin(), s.end(), [&](double v) { return v == s.front(); });
  };
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (constant(x) || constant(y) || sxx == 0.0 || syy == 0.0) {
    std::string what = label.empty() ? "series" : std::string(label);
    throw UndefinedCorrelation("correlation undefined: " + what + " is constant");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double HeadReport::mean_accuracy() const {
  return std::accumulate(accuracy.begin(), accuracy.end(), 0.0) / static_cast<double>(accuracy.size());
}

double HeadReport::mean_correlation() const {
  return std::accumulate(correlation.begin(), correlation.end(), 0.0) / static_cast<double>(correlation.size());
}

EvalReport evaluate(std::span<const Sample> samples, const Predictor& predict, HeadSet heads) {
  if (samples.empty()) throw Error("evaluate: no samples");
  std::vector<TraitValues> preds, truth;
  preds.reserve(samples.size());
  for (const auto& s : samples) {
    preds.push_back(predict(s));
    truth.push_back(s.labels());
  }
  EvalReport r;
  r.model = heads.str();
  r.modalities = samples.front().features.present().str();
  r.samples = samples.size();
  if (heads.bigfive) r.bigfive = score_head(Head::bigfive, preds, truth);
  if (heads.hexaco) r.hexaco = score_head(Head::hexaco, preds, truth);
  return r;
}

std::vector<TraitValues> predict_all(const JointModel& model, std::span<const Sample> samples) {
  NoGradGuard no_grad;
  std::vector<TraitValues> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(model.forward(s.features, Mode::eval).values());
  return out;
}

EvalReport evaluate_model(const JointModel& model, std::span<const Sample> samples) {
  NoGradGuard no_grad;
  auto r = evaluate(
      samples, [&](const Sample& s) { return model.forward(s.features, Mode::eval).values(); },
      model.config().heads);
  r.modalities = model.config().modalities.str();
  return r;
}

CrossMatrix cross_correlation_matrix(std::span<const BigFive> bigfive, std::span<const Hexaco> hexaco) {
  if (bigfive.size() != hexaco.size()) {
    throw ShapeError("cross_correlation_matrix: " + std::to_string(bigfive.size()) + " Big Five rows vs " +
                     std::to_string(hexaco.size()) + " HEXACO rows");
  }
  const std::size_t n = bigfive.size();
  std::vector<std::vector<double>> b(kBigFiveTraits, std::vector<double>(n));
  std::vector<std::vector<double>> h(kHexacoTraits, std::vector<double>(n));
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t i = 0; i < kBigFiveTraits; ++i) b[i][s] = bigfive[s][i];
    for (std::size_t j = 0; j < kHexacoTraits; ++j) h[j][s] = hexaco[s][j];
  }
  // Check each column once so the error names the offending trait.
  for (std::size_t i = 0; i < kBigFiveTraits; ++i) {
    if (std::all_of(b[i].begin(), b[i].end(), [&](double v) { return v == b[i].front(); })) {
      throw UndefinedCorrelation("correlation undefined: Big Five " + std::string(kBigFiveKeys[i]) +
                                 " predictions are constant");
    }
  }
  for (std::size_t j = 0; j < kHexacoTraits; ++j) {
    if (std::all_of(h[j].begin(), h[j].end(), [&](double v) { return v == h[j].front(); })) {
      throw UndefinedCorrelation("correlation undefined: HEXACO " + std::string(kHexacoKeys[j]) +
                                 " predictions are constant");
    }
  }
  CrossMatrix m;
  for (std::size_t i = 0; i < kBigFiveTraits; ++i)
    for (std::size_t j = 0; j < kHexacoTraits; ++j) m(i, j) = pearson(b[i], h[j]);
  return m;
}

std::string report_csv(const EvalReport& report) {
  std::string out;
  for_each_head(report, [&](const HeadReport& h) {
    out += "model,modalities,head,metric";
    for (auto k : head_keys(h.head)) out += "," + std::string(k);
    out += ",mean\n";
    const std::string prefix = report.model + ",\"" + report.modalities + "\"," +
                               std::string(head_name(h.head)) + ",";
    out += prefix + "corr";
    for (double c : h.correlation) out += "," + format_double(c);
    out += "," + format_double(h.mean_correlation()) + "\n";
    out += prefix + "acc";
    for (double a : h.accuracy) out += "," + format_double(100.0 * a);
    out += "," + format_double(100.0 * h.mean_accuracy()) + "\n";
  });
  return out;
}

std::string report_text(const EvalReport& report) {
  std::string out = "model: " + report.model + "  modalities: " + report.modalities +
                    "  samples: " + std::to_string(report.samples) + "\n";
  for_each_head(report, [&](const HeadReport& h) {
    char line[256];
    out += "\n" + std::string(head_name(h.head)) + "\n";
    std::string header = "        ";
    for (auto k : head_keys(h.head)) {
      std::snprintf(line, sizeof line, "%8s", std::string(k).c_str());
      header += line;
    }
    out += header + "    mean\n";
    std::string corr = "Corr.   ", acc = "Acc.    ";
    for (std::size_t j = 0; j < h.correlation.size(); ++j) {
      std::snprintf(line, sizeof line, "%8s", fixed(h.correlation[j], 3).c_str());
      corr += line;
      std::snprintf(line, sizeof line, "%8s", fixed(100.0 * h.accuracy[j], 1).c_str());
      acc += line;
    }
    std::snprintf(line, sizeof line, "%8s", fixed(h.mean_correlation(), 3).c_str());
    corr += line;
    std::snprintf(line, sizeof line, "%8s", fixed(100.0 * h.mean_accuracy(), 1).c_str());
    acc += line;
    out += corr + "\n" + acc + "\n";
  });
  return out;
}

std::string cross_matrix_csv(const CrossMatrix& m) {
  std::string out;
  for (auto k : kHexacoKeys) out += "," + std::string(k);
  out += "\n";
  for (std::size_t i = 0; i < kBigFiveTraits; ++i) {
    out += std::string(kBigFiveKeys[i]);
    for (std::size_t j = 0; j < kHexacoTraits; ++j) out += "," + format_double(m(i, j));
    out += "\n";
  }
  return out;
}

}  // namespace persona
