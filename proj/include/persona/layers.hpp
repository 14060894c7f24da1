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

#ifndef PERSONA_LAYERS_HPP
#define PERSONA_LAYERS_HPP

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "persona/ops.hpp"
#include "persona/tensor.hpp"

namespace persona {

struct NamedParameter {
  std::string name;
  Tensor tensor;
};

using ParameterList = std::vector<NamedParameter>;

enum class Mode { train, eval };

/// Everything a layer needs at forward time besides its inputs.
struct ForwardContext {
  Mode mode = Mode::eval;
  std::mt19937_64* rng = nullptr;  // required when mode == train and dropout > 0

  bool training() const { return mode == Mode::train; }
};

Tensor drop(const Tensor& x, double p, ForwardContext& ctx);

// Glorot-uniform weights.
Tensor init_weight(Shape shape, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);
Tensor init_normal(Shape shape, double stddev, std::mt19937_64& rng);

/// Sinusoidal position table [length x d].
Tensor sinusoidal_positions(std::size_t length, std::size_t d);

class Linear {
 public:
  Linear() = default;
  Linear(std::size_t in, std::size_t out, std::mt19937_64& rng, bool with_bias = true);

  Tensor operator()(const Tensor& x) const;
  void append_parameters(const std::string& prefix, ParameterList& out) const;

  Tensor weight;  // [in x out]
  Tensor bias;    // [out], undefined when built without bias
};

class LayerNorm {
 public:
  LayerNorm() = default;
  explicit LayerNorm(std::size_t d, double eps = 1e-5);

  Tensor operator()(const Tensor& x) const;
  void append_parameters(const std::string& prefix, ParameterList& out) const;

  Tensor gamma;
  Tensor beta;
  double eps = 1e-5;
};

/// Scaled dot-product attention over n_heads column slices.
///
/// The key projection carries no bias: a key bias shifts every score of a
/// query row by the same amount and cancels in the softmax.
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(std::size_t d, std::size_t n_heads, std::mt19937_64& rng);

  Tensor operator()(const Tensor& q, const Tensor& k, const Tensor& v) const;
  void append_parameters(const std::string& prefix, ParameterList& out) const;

  std::size_t n_heads = 1;
  Linear query, key, value, output;
};

class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(std::size_t d, std::size_t d_ff, std::mt19937_64& rng);

  Tensor operator()(const Tensor& x) const;
  void append_parameters(const std::string& prefix, ParameterList& out) const;

  Linear inner, outer;
};

/// Pre-norm encoder block:
///   y = x + drop(MHA(LN1(x)))
///   out = y + drop(FFN(LN2(y)))
class TransformerBlock {
 public:
  TransformerBlock() = default;
  TransformerBlock(std::size_t d, std::size_t d_ff, std::size_t n_heads, double dropout,
                   std::mt19937_64& rng);

  Tensor operator()(const Tensor& x, ForwardContext& ctx) const;
  void append_parameters(const std::string& prefix, ParameterList& out) const;

  LayerNorm norm1, norm2;
  MultiHeadAttention attention;
  FeedForward ffn;
  double dropout = 0.0;
};

/// Kernel-3 same-padded convolution, swish, then max pooling by 2.
/// Maps [T x in] to [ceil(T/2) x out].
class ConvDownsample {
 public:
  ConvDownsample() = default;
  ConvDownsample(std::size_t in, std::size_t out, std::mt19937_64& rng);

  Tensor operator()(const Tensor& x) const;
  void append_parameters(const std::string& prefix, ParameterList& out) const;

  Tensor weight;  // [3 x in x out]
  Tensor bias;    // [out]
};

/// A stack of transformer blocks followed by a final layer norm.
class EncoderStack {
 public:
  EncoderStack() = default;
  EncoderStack(std::size_t n_blocks, std::size_t d, std::size_t d_ff, std::size_t n_heads,
               double dropout, std::mt19937_64& rng);

  Tensor operator()(const Tensor& x, ForwardContext& ctx) const;
  void append_parameters(const std::string& prefix, ParameterList& out) const;

  std::vector<TransformerBlock> blocks;
  LayerNorm final_norm;
};

}  // namespace persona

#endif  // PERSONA_LAYERS_HPP
