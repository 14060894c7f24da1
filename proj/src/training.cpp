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

#include "persona/training.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace persona {

namespace {

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

template <std::size_t N>
void check_target(const std::array<double, N>& t, std::string_view head) {
  for (double v : t) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw RangeError(std::string(head) + " target " + std::to_string(v) + " outside [0, 1]");
    }
  }
}

Tensor head_mae(const Tensor& pred, std::span<const double> target) {
  Tensor t = Tensor::from({target.size()}, std::vector<double>(target.begin(), target.end()));
  return mean(abs(sub(pred, t)));
}

template <std::size_t N>
double mae(std::span<const double> pred, const std::array<double, N>& truth) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += std::fabs(pred[i] - truth[i]);
  return s / static_cast<double>(N);
}

HeadLosses head_losses(const JointOutput& pred, const Sample& s) {
  HeadLosses h;
  if (pred.bigfive) h.bigfive = mae(pred.bigfive->data(), s.bigfive);
  if (pred.hexaco) h.hexaco = mae(pred.hexaco->data(), s.hexaco);
  return h;
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("train.batch_size must be at least 1");
  if (!(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0) ||
      !(optimizer.beta2 > 0.0 && optimizer.beta2 < 1.0)) {
    throw ConfigError("train.beta1 must lie in [0, 1) and train.beta2 in (0, 1)");
  }
  if (!(optimizer.learning_rate > 0.0)) throw ConfigError("train.learning_rate must be positive");
  if (!(optimizer.eps > 0.0)) throw ConfigError("train.eps must be positive");
  if (patience == 0) throw ConfigError("train.patience must be at least 1");
  if (max_epochs == 0) throw ConfigError("train.max_epochs must be at least 1");
  if (loss_weights.bigfive < 0.0 || loss_weights.hexaco < 0.0) {
    throw ConfigError("loss weights must be non-negative");
  }
  if (max_grad_norm < 0.0) throw ConfigError("train.max_grad_norm must be non-negative");
}

Tensor sample_loss(const JointOutput& pred, const TraitValues& target, const LossWeights& weights) {
  if (!pred.bigfive && !pred.hexaco) throw ConfigError("prediction carries no head");
  std::optional<Tensor> total;
  auto accumulate = [&](Tensor term) { total = total ? add(*total, term) : term; };
  if (pred.bigfive) {
    if (!target.bigfive) throw ConfigError("Big Five prediction without a Big Five target");
    check_target(*target.bigfive, "Big Five");
    accumulate(scale(head_mae(*pred.bigfive, *target.bigfive), weights.bigfive));
  }
  if (pred.hexaco) {
    if (!target.hexaco) throw ConfigError("HEXACO prediction without a HEXACO target");
    check_target(*target.hexaco, "HEXACO");
    accumulate(scale(head_mae(*pred.hexaco, *target.hexaco), weights.hexaco));
  }
  return *total;
}

Tensor joint_loss(std::span<const JointOutput> preds, std::span<const TraitValues> targets,
                  const LossWeights& weights) {
  if (preds.size() != targets.size() || preds.empty()) {
    throw ShapeError("joint_loss: " + std::to_string(preds.size()) + " predictions for " +
                     std::to_string(targets.size()) + " targets");
  }
  std::vector<Tensor> terms;
  terms.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    terms.push_back(reshape(sample_loss(preds[i], targets[i], weights), {1, 1}));
  }
  return mean(concat_rows(terms));
}

void radam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                  std::span<double> v, std::uint64_t t, const RAdamConfig& cfg) {
  if (t == 0) throw Error("radam_update: step counter starts at 1");
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double td = static_cast<double>(t);
  const double b1t = std::pow(b1, td);
  const double b2t = std::pow(b2, td);
  const double rho_inf = 2.0 / (1.0 - b2) - 1.0;
  const double rho_t = rho_inf - 2.0 * td * b2t / (1.0 - b2t);
  const bool rectified = rho_t > 4.0;
  double r = 0.0;
  if (rectified) {
    r = std::sqrt(((rho_t - 4.0) * (rho_t - 2.0) * rho_inf) /
                  ((rho_inf - 4.0) * (rho_inf - 2.0) * rho_t));
  }
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
    v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
    const double m_hat = m[i] / (1.0 - b1t);
    if (rectified) {
      const double v_hat = std::sqrt(v[i] / (1.0 - b2t));
      param[i] -= cfg.learning_rate * r * m_hat / (v_hat + cfg.eps);
    } else {
      param[i] -= cfg.learning_rate * m_hat;
    }
  }
}

RAdam::RAdam(ParameterList params, RAdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor.numel(), 0.0);
    v_.emplace_back(p.tensor.numel(), 0.0);
  }
}

void RAdam::step() {
  for (const auto& p : params_) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient for parameter " + p.name);
    }
  }
  ++t_;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor& t = params_[k].tensor;
    if (!t.has_grad()) continue;
    radam_update(t.mutable_data(), t.mutable_grad(), m_[k], v_[k], t_, cfg_);
  }
}

double clip_grad_norm(const ParameterList& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto p : params) {
      if (!p.tensor.has_grad()) continue;
      for (double& g : p.tensor.mutable_grad()) g *= s;
    }
  }
  return norm;
}

std::vector<std::vector<std::size_t>> make_batches(std::span<const Sample> samples,
                                                   std::size_t batch_size, std::uint64_t seed) {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  auto rng = seeded(seed, 0x5eed);
  std::shuffle(order.begin(), order.end(), rng);

  using Key = std::array<std::size_t, 3>;
  std::vector<Key> keys;
  std::map<Key, std::vector<std::size_t>> groups;
  for (auto i : order) {
    const auto& f = samples[i].features;
    Key k{f.audio ? f.audio->dim(0) : 0, f.text ? f.text->size() : 0,
          f.visual ? f.visual->dim(0) : 0};
    auto [it, inserted] = groups.try_emplace(k);
    if (inserted) keys.push_back(k);
    it->second.push_back(i);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (const auto& k : keys) {
    const auto& members = groups[k];
    for (std::size_t start = 0; start < members.size(); start += batch_size) {
      const auto end = std::min(members.size(), start + batch_size);
      batches.emplace_back(members.begin() + static_cast<std::ptrdiff_t>(start),
                           members.begin() + static_cast<std::ptrdiff_t>(end));
    }
  }
  std::shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

bool EarlyStopping::update(double val_loss) {
  ++epoch_;
  if (epoch_ == 1 || val_loss < best_) {
    best_ = val_loss;
    best_epoch_ = epoch_;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

Evaluation evaluate_loss(const JointModel& model, std::span<const Sample> samples,
                         const LossWeights& weights) {
  if (samples.empty()) throw Error("evaluate_loss: empty sample set");
  NoGradGuard no_grad;
  Evaluation e;
  for (const auto& s : samples) {
    const auto h = head_losses(model.forward(s.features, Mode::eval), s);
    e.heads.bigfive += h.bigfive;
    e.heads.hexaco += h.hexaco;
  }
  const double n = static_cast<double>(samples.size());
  e.heads.bigfive /= n;
  e.heads.hexaco /= n;
  const auto& heads = model.config().heads;
  e.loss = (heads.bigfive ? weights.bigfive * e.heads.bigfive : 0.0) +
           (heads.hexaco ? weights.hexaco * e.heads.hexaco : 0.0);
  return e;
}

TrainState fit(JointModel& model, std::span<const Sample> train, std::span<const Sample> val,
               const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.empty()) throw Error("training split is empty");
  if (val.empty()) throw Error("validation split is empty");

  model.reseed_dropout(cfg.seed);
  ParameterList params = model.parameters();
  RAdam optimizer(params, cfg.optimizer);
  EarlyStopping stopper(cfg.patience);
  std::vector<std::vector<double>> best_weights;
  TrainState state;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto batches = make_batches(train, cfg.batch_size, cfg.seed * 1000003ULL + epoch);
    double loss_sum = 0.0;
    HeadLosses head_sum;
    for (const auto& batch : batches) {
      std::vector<JointOutput> preds;
      std::vector<TraitValues> targets;
      Tape tape;
      Tensor loss;
      {
        auto rec = tape.record();
        for (auto i : batch) {
          preds.push_back(model.forward(train[i].features, Mode::train));
          targets.push_back(train[i].labels());
        }
        loss = joint_loss(preds, targets, cfg.loss_weights);
      }
      tape.backward(loss);
      if (cfg.max_grad_norm > 0.0) clip_grad_norm(params, cfg.max_grad_norm);
      optimizer.step();
      model.zero_grad();

      loss_sum += loss.item() * static_cast<double>(batch.size());
      for (std::size_t j = 0; j < batch.size(); ++j) {
        const auto h = head_losses(preds[j], train[batch[j]]);
        head_sum.bigfive += h.bigfive;
        head_sum.hexaco += h.hexaco;
      }
    }
    const double n = static_cast<double>(train.size());
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / n;
    record.train_heads = {head_sum.bigfive / n, head_sum.hexaco / n};
    const auto v = evaluate_loss(model, val, cfg.loss_weights);
    record.val_loss = v.loss;
    record.val_heads = v.heads;
    state.history.push_back(record);
    if (on_epoch) on_epoch(record);

    if (stopper.update(v.loss)) {
      best_weights.clear();
      for (const auto& p : params) best_weights.emplace_back(p.tensor.data().begin(), p.tensor.data().end());
    }
    if (stopper.should_stop()) break;
  }

  for (std::size_t k = 0; k < params.size(); ++k) {
    auto dst = params[k].tensor.mutable_data();
    std::copy(best_weights[k].begin(), best_weights[k].end(), dst.begin());
  }
  state.steps = optimizer.steps();
  state.best_val_loss = stopper.best();
  state.best_epoch = stopper.best_epoch();
  state.epochs_since_improvement = stopper.epochs_since_improvement();
  return state;
}

}  // namespace persona
