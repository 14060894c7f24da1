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

#include "persona/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace persona {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
  return std::fabs(analytic - numeric) / denom;
}

double grad_check(const std::function<Tensor()>& loss, std::span<Tensor> inputs, double eps) {
  std::vector<bool> had_flag;
  for (auto& x : inputs) {
    had_flag.push_back(x.requires_grad());
    x.set_requires_grad(true);
    x.zero_grad();
  }

  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    Tensor out;
    {
      auto rec = tape.record();
      out = loss();
    }
    if (out.numel() != 1) {
      throw ShapeError("grad_check needs a scalar function, got shape " + shape_string(out.shape()));
    }
    tape.backward(out);
    for (auto& x : inputs) analytic.push_back(x.grad());
  }

  double worst = 0.0;
  NoGradGuard no_grad;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto values = inputs[k].mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = loss().item();
      values[i] = saved - eps;
      const double down = loss().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      worst = std::max(worst, relative_error(analytic[k][i], numeric));
    }
  }

  for (std::size_t k = 0; k < inputs.size(); ++k) {
    inputs[k].zero_grad();
    inputs[k].set_requires_grad(had_flag[k]);
  }
  return worst;
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x, double eps) {
  Tensor inputs[] = {x};
  return grad_check([&] { return f(x); }, inputs, eps);
}

}  // namespace persona
