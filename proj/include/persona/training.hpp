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

#ifndef PERSONA_TRAINING_HPP
#define PERSONA_TRAINING_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "persona/dataset.hpp"
#include "persona/model.hpp"

namespace persona {

struct LossWeights {
  double bigfive = 1.0;
  double hexaco = 1.0;
};

struct RAdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  std::size_t batch_size = 8;
  RAdamConfig optimizer;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  LossWeights loss_weights;
  double max_grad_norm = 0.0;  // 0 disables clipping

  void validate() const;
};

/// Per-head mean absolute errors of one prediction (or averaged over a set).
struct HeadLosses {
  double bigfive = 0.0;
  double hexaco = 0.0;
};

/// Per-sample objective: w_y * mean|y_hat - y| + w_z * mean|z_hat - z| over
/// the heads the prediction carries. Targets must lie in [0, 1].
Tensor sample_loss(const JointOutput& pred, const TraitValues& target,
                   const LossWeights& weights = {});

/// Batch objective: the mean of sample_loss over the batch.
Tensor joint_loss(std::span<const JointOutput> preds, std::span<const TraitValues> targets,
                  const LossWeights& weights = {});

/// One rectified-Adam update of a single parameter buffer, t >= 1.
///
///   m = b1 m + (1-b1) g,  v = b2 v + (1-b2) g^2,  m_hat = m / (1-b1^t)
///   rho_inf = 2/(1-b2) - 1,  rho_t = rho_inf - 2 t b2^t / (1-b2^t)
///   rho_t > 4:  r_t = sqrt((rho_t-4)(rho_t-2) rho_inf / ((rho_inf-4)(rho_inf-2) rho_t))
///               p -= lr r_t m_hat / (sqrt(v / (1-b2^t)) + eps)
///   otherwise:  p -= lr m_hat
void radam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                  std::span<double> v, std::uint64_t t, const RAdamConfig& cfg);

/// RAdam over a parameter list; owns the moment buffers.
class RAdam {
 public:
  RAdam(ParameterList params, RAdamConfig cfg);

  /// Applies one update from the accumulated gradients. Throws NumericError
  /// naming the parameter if any gradient is non-finite.
  void step();
  std::uint64_t steps() const { return t_; }
  const ParameterList& parameters() const { return params_; }
  std::span<const std::vector<double>> first_moments() const { return m_; }
  std::span<const std::vector<double>> second_moments() const { return v_; }

 private:
  ParameterList params_;
  RAdamConfig cfg_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::uint64_t t_ = 0;
};

/// Global L2 norm of all gradients; rescales them to `max_norm` if larger.
double clip_grad_norm(const ParameterList& params, double max_norm);

/// Seeded shuffle, then grouping by identical per-modality sequence lengths
/// (in order of first appearance), chunked into batches of at most
/// batch_size. Returns indices into `samples`.
std::vector<std::vector<std::size_t>> make_batches(std::span<const Sample> samples,
                                                   std::size_t batch_size, std::uint64_t seed);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  HeadLosses train_heads;
  HeadLosses val_heads;
};

struct TrainState {
  std::uint64_t steps = 0;
  double best_val_loss = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs_since_improvement = 0;
  std::vector<EpochRecord> history;
};

/// Stops after `patience` consecutive epochs without a strict improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  /// Records one epoch's validation loss; true if it is a new best.
  bool update(double val_loss);
  bool should_stop() const { return since_best_ >= patience_; }
  double best() const { return best_; }
  std::size_t best_epoch() const { return best_epoch_; }
  std::size_t epochs_since_improvement() const { return since_best_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t since_best_ = 0;
  double best_ = 0.0;
};

struct Evaluation {
  double loss = 0.0;  // weighted sum of the head MAEs
  HeadLosses heads;
};

/// Eval-mode loss over a sample set.
Evaluation evaluate_loss(const JointModel& model, std::span<const Sample> samples,
                         const LossWeights& weights = {});

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch training with early stopping on validation loss. On return
/// the model holds the weights of the best validation epoch.
TrainState fit(JointModel& model, std::span<const Sample> train, std::span<const Sample> val,
               const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace persona

#endif  // PERSONA_TRAINING_HPP
