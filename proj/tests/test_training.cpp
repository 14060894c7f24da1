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
#include <limits>
#include <random>
#include <set>

#include "oracles.hpp"
#include "persona/errors.hpp"
#include "persona/synthdata.hpp"
#include "persona/training.hpp"

using namespace persona;

namespace {

JointOutput constant_output(double b, double h) {
  return {Tensor::full({5}, b), Tensor::full({6}, h)};
}

TraitValues labels(BigFive b, Hexaco h) { return {b, h}; }

Sample with_lengths(std::size_t ta, std::size_t tt, std::size_t tv) {
  Sample s;
  s.features.audio = Tensor::zeros({ta, 80});
  s.features.text = std::vector<std::size_t>(tt, 0);
  s.features.visual = Tensor::zeros({tv, 16});
  return s;
}

std::vector<Sample> small_dataset(std::size_t persons, std::uint64_t seed) {
  GeneratorConfig g;
  g.persons = persons;
  g.videos_per_person = 2;
  g.audio_length = {8, 8};
  g.visual_length = {3, 4};
  g.text_length = {4, 4};
  g.vocab_size = 10;
  g.visual_dim = 4;
  g.seed = seed;
  return generate_dataset(g);
}

}  // namespace

TEST(JointLoss, HandValues) {
  // |0.5 - y| averages 0.3 over Big Five and 0.1 over HEXACO.
  const auto pred = constant_output(0.5, 0.5);
  const auto target = labels({0.2, 0.8, 0.2, 0.8, 0.5}, {0.4, 0.6, 0.4, 0.6, 0.5, 0.5});
  const double expect_b = (0.3 * 4 + 0.0) / 5.0;
  const double expect_h = (0.1 * 4 + 0.0) / 6.0;
  EXPECT_NEAR(sample_loss(pred, target).item(), expect_b + expect_h, 1e-15);

  const auto exact = labels({0.3, 0.3, 0.3, 0.3, 0.3}, {0.6, 0.6, 0.6, 0.6, 0.6, 0.6});
  const auto off = constant_output(0.6, 0.5);
  EXPECT_NEAR(sample_loss(off, exact).item(), 0.3 + 0.1, 1e-15);
  EXPECT_NEAR(sample_loss(off, exact, {1.0, 0.0}).item(), 0.3, 1e-15);
  EXPECT_NEAR(sample_loss(off, exact, {0.0, 2.0}).item(), 0.2, 1e-15);
}

TEST(JointLoss, BatchMeanAndHeadAdditivity) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u;
  std::vector<JointOutput> preds;
  std::vector<TraitValues> targets;
  for (int i = 0; i < 4; ++i) {
    JointOutput p{Tensor::zeros({5}), Tensor::zeros({6})};
    for (auto& v : p.bigfive->mutable_data()) v = u(rng);
    for (auto& v : p.hexaco->mutable_data()) v = u(rng);
    BigFive b;
    Hexaco h;
    for (auto& v : b) v = u(rng);
    for (auto& v : h) v = u(rng);
    preds.push_back(p);
    targets.push_back(labels(b, h));
  }
  double mean = 0;
  for (int i = 0; i < 4; ++i) mean += sample_loss(preds[i], targets[i]).item() / 4;
  EXPECT_NEAR(joint_loss(preds, targets).item(), mean, 1e-15);
  const double only_b = joint_loss(preds, targets, {1.0, 0.0}).item();
  const double only_h = joint_loss(preds, targets, {0.0, 1.0}).item();
  EXPECT_NEAR(joint_loss(preds, targets).item(), only_b + only_h, 1e-15);

  // A Big-Five-only prediction ignores HEXACO labels.
  JointOutput b5{preds[0].bigfive, std::nullopt};
  EXPECT_NEAR(sample_loss(b5, targets[0]).item(), sample_loss(preds[0], targets[0], {1.0, 0.0}).item(), 1e-15);
}

TEST(JointLoss, RejectsOutOfRangeTargets) {
  const auto pred = constant_output(0.5, 0.5);
  EXPECT_THROW(sample_loss(pred, labels({1.5, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0})), RangeError);
}

TEST(RAdamUpdate, MatchesOracleIncludingWarmup) {
  const double a = 3.0, c = 0.25, p0 = 2.0;
  for (double b2 : {0.999, 0.9, 0.8}) {
    const RAdamConfig cfg{0.05, 0.9, b2, 1e-8};
    const auto trace = oracle::radam_quadratic(p0, a, c, 5, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps);
    double p = p0, m = 0, v = 0;
    for (std::uint64_t t = 1; t <= 5; ++t) {
      const double g = a * (p - c);
      radam_update(std::span<double>(&p, 1), std::span<const double>(&g, 1), std::span<double>(&m, 1),
                   std::span<double>(&v, 1), t, cfg);
      EXPECT_NEAR(p, trace.params[t - 1], 1e-12) << "b2 " << b2 << " t " << t;
    }
    // The first step is never rectified.
    EXPECT_FALSE(trace.rectified.front());
    if (b2 <= 0.9) EXPECT_TRUE(trace.rectified.back());
  }
}

TEST(RAdamUpdate, FirstStepIsPlainMomentumStep) {
  const RAdamConfig cfg{0.1, 0.9, 0.999, 1e-8};
  double p = 1.0, g = 4.0, m = 0, v = 0;
  radam_update(std::span<double>(&p, 1), std::span<const double>(&g, 1), std::span<double>(&m, 1),
               std::span<double>(&v, 1), 1, cfg);
  // m_hat = g at t = 1.
  EXPECT_NEAR(p, 1.0 - 0.1 * 4.0, 1e-15);
}

TEST(RAdam, ZeroGradientLeavesParametersAndBeta1Zero) {
  Tensor w = Tensor::parameter({3}, {1.0, -2.0, 0.5});
  RAdam opt({{"w", w}}, RAdamConfig{0.1, 0.9, 0.8, 1e-8});
  for (int i = 0; i < 6; ++i) {
    w.zero_grad();
    opt.step();
  }
  EXPECT_EQ(w[0], 1.0);
  EXPECT_EQ(w[1], -2.0);
  EXPECT_EQ(opt.steps(), 6u);

  // b1 = 0: the first moment is the raw gradient.
  const RAdamConfig cfg{0.05, 0.0, 0.8, 1e-8};
  const auto trace = oracle::radam_quadratic(2.0, 1.5, -1.0, 5, cfg.learning_rate, 0.0, 0.8, 1e-8);
  Tensor p = Tensor::parameter({1}, {2.0});
  RAdam opt2({{"p", p}}, cfg);
  for (int t = 0; t < 5; ++t) {
    p.zero_grad();
    p.mutable_grad()[0] = 1.5 * (p[0] + 1.0);
    opt2.step();
    EXPECT_NEAR(p[0], trace.params[t], 1e-12);
    EXPECT_EQ(opt2.first_moments()[0][0], p.grad()[0]);
  }
}

TEST(RAdam, NonFiniteGradientNamesParameter) {
  Tensor w = Tensor::parameter({2}, {1.0, 1.0});
  RAdam opt({{"layer.weight", w}}, {});
  w.zero_grad();
  w.mutable_grad()[1] = std::numeric_limits<double>::quiet_NaN();
  try {
    opt.step();
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("layer.weight"), std::string::npos);
  }
}

TEST(ClipGradNorm, RescalesOnlyWhenLarger) {
  Tensor a = Tensor::parameter({2}, {0, 0}), b = Tensor::parameter({1}, {0});
  a.zero_grad();
  b.zero_grad();
  a.mutable_grad()[0] = 3.0;
  b.mutable_grad()[0] = 4.0;
  const ParameterList params{{"a", a}, {"b", b}};
  EXPECT_NEAR(clip_grad_norm(params, 10.0), 5.0, 1e-15);
  EXPECT_EQ(a.grad()[0], 3.0);
  EXPECT_NEAR(clip_grad_norm(params, 1.0), 5.0, 1e-15);
  EXPECT_NEAR(a.grad()[0], 0.6, 1e-15);
  EXPECT_NEAR(b.grad()[0], 0.8, 1e-15);
}

TEST(MakeBatches, GroupsEqualLengthsAndCoversEverything) {
  std::vector<Sample> samples;
  for (int i = 0; i < 7; ++i) samples.push_back(with_lengths(12, 4, 3));
  for (int i = 0; i < 3; ++i) samples.push_back(with_lengths(8, 4, 3));
  for (int i = 0; i < 2; ++i) samples.push_back(with_lengths(12, 5, 3));
  const auto batches = make_batches(samples, 3, 42);
  // ceil(7/3) + 1 + 1
  EXPECT_EQ(batches.size(), 5u);
  std::multiset<std::size_t> seen;
  for (const auto& batch : batches) {
    EXPECT_LE(batch.size(), 3u);
    for (auto i : batch) {
      seen.insert(i);
      EXPECT_EQ(samples[i].features.audio->dim(0), samples[batch[0]].features.audio->dim(0));
      EXPECT_EQ(samples[i].features.text->size(), samples[batch[0]].features.text->size());
    }
  }
  EXPECT_EQ(seen.size(), samples.size());
  EXPECT_EQ(std::set<std::size_t>(seen.begin(), seen.end()).size(), samples.size());
  EXPECT_EQ(make_batches(samples, 3, 42), batches);

  bool differs = false;
  for (std::uint64_t seed = 43; seed < 53 && !differs; ++seed) differs = make_batches(samples, 3, seed) != batches;
  EXPECT_TRUE(differs);
  EXPECT_EQ(make_batches(samples, 100, 1).size(), 3u);
}

TEST(EarlyStopping, PatienceCounting) {
  EarlyStopping one(1);
  EXPECT_TRUE(one.update(1.0));
  EXPECT_FALSE(one.should_stop());
  EXPECT_FALSE(one.update(1.0));  // equal is not an improvement
  EXPECT_TRUE(one.should_stop());

  EarlyStopping three(3);
  for (double v : {5.0, 4.0, 4.5, 3.0, 3.5, 3.2}) {
    three.update(v);
    EXPECT_FALSE(three.should_stop());
  }
  EXPECT_EQ(three.best_epoch(), 4u);
  three.update(3.0);
  EXPECT_TRUE(three.should_stop());
  EXPECT_EQ(three.best(), 3.0);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.optimizer.beta1 = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.loss_weights.hexaco = -1;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Fit, DeterministicRestoresBestAndLearns) {
  const auto data = small_dataset(10, 5);
  const auto train = select_split(data, Split::train);
  const auto val = select_split(data, Split::val);
  ASSERT_FALSE(train.empty());
  ASSERT_FALSE(val.empty());

  ModelConfig mc = ModelConfig::tiny();
  mc.dropout = 0.1;
  TrainConfig tc;
  tc.max_epochs = 6;
  tc.patience = 2;
  tc.batch_size = 4;
  tc.optimizer.learning_rate = 3e-3;
  tc.seed = 3;

  JointModel a(mc), b(mc);
  std::size_t callbacks = 0;
  const auto sa = fit(a, train, val, tc, [&](const EpochRecord&) { ++callbacks; });
  const auto sb = fit(b, train, val, tc);
  ASSERT_EQ(sa.history.size(), sb.history.size());
  EXPECT_EQ(callbacks, sa.history.size());
  for (std::size_t e = 0; e < sa.history.size(); ++e) {
    EXPECT_EQ(sa.history[e].train_loss, sb.history[e].train_loss);
    EXPECT_EQ(sa.history[e].val_loss, sb.history[e].val_loss);
  }
  EXPECT_EQ(evaluate_loss(a, val).loss, sa.best_val_loss);
  EXPECT_EQ(sa.history[sa.best_epoch - 1].val_loss, sa.best_val_loss);
  EXPECT_LT(sa.history.back().train_loss, sa.history.front().train_loss);
  EXPECT_GT(sa.steps, 0u);

  const auto e = evaluate_loss(a, val);
  EXPECT_NEAR(e.loss, e.heads.bigfive + e.heads.hexaco, 1e-15);
}
