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

#ifndef PERSONA_GRADCHECK_HPP
#define PERSONA_GRADCHECK_HPP

#include <functional>
#include <span>

#include "persona/tensor.hpp"

namespace persona {

/// Relative error used by the checks: |a - n| / max(|a|, |n|, 1e-8).
double relative_error(double analytic, double numeric);

/// Compares the taped gradient of `loss` wrt each tensor in `inputs` with
/// central differences (f(x+eps) - f(x-eps)) / 2eps. `loss` must be
/// deterministic and return a scalar; it is called once under a fresh tape
/// and twice per coordinate without recording. Inputs are restored and
/// their gradients cleared on return. Returns the maximum relative error.
double grad_check(const std::function<Tensor()>& loss, std::span<Tensor> inputs, double eps = 1e-5);

/// Single-input form: f is evaluated on x itself.
double grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x, double eps = 1e-5);

}  // namespace persona

#endif  // PERSONA_GRADCHECK_HPP
