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

#ifndef PERSONA_OPS_HPP
#define PERSONA_OPS_HPP

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "persona/tensor.hpp"

namespace persona {

// Differentiable primitives. Every op validates shapes, computes its value
// eagerly and, when a tape is recording, registers its gradient rule.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
/// x[..., d] + bias[d], broadcast over all leading axes.
Tensor add_bias(const Tensor& x, const Tensor& bias);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor abs(const Tensor& x);

/// Max-subtracted exponentiate-and-normalise along `axis`.
Tensor softmax(const Tensor& x, std::size_t axis);

/// Standardises each position over the last axis (population variance)
/// and applies gamma, beta.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

enum class Activation { sigmoid, swish, tanh };

Activation parse_activation(std::string_view name);
Tensor activation(const Tensor& x, Activation kind);
Tensor sigmoid(const Tensor& x);
Tensor swish(const Tensor& x);
Tensor tanh(const Tensor& x);

/// 1-D convolution over rows of x[T x in] with zero "same" padding.
/// weight is [k x in x out] with odd k, bias is [out].
Tensor conv1d_same(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// Width-2, stride-2 max pooling over rows; an odd trailing row forms its
/// own window, so the output has ceil(T/2) rows.
Tensor max_pool1d(const Tensor& x);

Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor slice_rows(const Tensor& x, std::size_t start, std::size_t count);
Tensor slice_cols(const Tensor& x, std::size_t start, std::size_t count);

/// Row lookup: out[t] = table[ids[t]].
Tensor gather_rows(const Tensor& table, std::span<const std::size_t> ids);

Tensor reshape(const Tensor& x, Shape shape);

/// Inverted dropout. Identity when !training or p == 0.
Tensor dropout(const Tensor& x, double p, bool training, std::mt19937_64& rng);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

}  // namespace persona

#endif  // PERSONA_OPS_HPP
