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

#include "persona/layers.hpp"

#include <cmath>

namespace persona {

Tensor drop(const Tensor& x, double p, ForwardContext& ctx) {
  if (!ctx.training() || p == 0.0) return x;
  if (ctx.rng == nullptr) throw ConfigError("training-mode dropout needs an RNG");
  return dropout(x, p, true, *ctx.rng);
}

Tensor init_weight(Shape shape, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = dist(rng);
  return Tensor::parameter(std::move(shape), std::move(v));
}

Tensor init_normal(Shape shape, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = dist(rng);
  return Tensor::parameter(std::move(shape), std::move(v));
}

Tensor sinusoidal_positions(std::size_t length, std::size_t d) {
  std::vector<double> v(length * d);
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t i = 0; i < d; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(d));
      const double angle = static_cast<double>(t) * rate;
      v[t * d + i] = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return Tensor::from({length, d}, std::move(v));
}

Linear::Linear(std::size_t in, std::size_t out, std::mt19937_64& rng, bool with_bias)
    : weight(init_weight({in, out}, in, out, rng)) {
  if (with_bias) bias = Tensor::parameter({out}, std::vector<double>(out, 0.0));
}

Tensor Linear::operator()(const Tensor& x) const {
  Tensor y = matmul(x, weight);
  return bias.defined() ? add_bias(y, bias) : y;
}

void Linear::append_parameters(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".weight", weight});
  if (bias.defined()) out.push_back({prefix + ".bias", bias});
}

LayerNorm::LayerNorm(std::size_t d, double eps_)
    : gamma(Tensor::parameter({d}, std::vector<double>(d, 1.0))),
      beta(Tensor::parameter({d}, std::vector<double>(d, 0.0))),
      eps(eps_) {}

Tensor LayerNorm::operator()(const Tensor& x) const { return layer_norm(x, gamma, beta, eps); }

void LayerNorm::append_parameters(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".gamma", gamma});
  out.push_back({prefix + ".beta", beta});
}

MultiHeadAttention::MultiHeadAttention(std::size_t d, std::size_t heads, std::mt19937_64& rng)
    : n_heads(heads) {
  if (heads == 0 || d % heads != 0) {
    throw ConfigError("model dimension " + std::to_string(d) + " is not divisible by " +
                      std::to_string(heads) + " heads");
  }
  query = Linear(d, d, rng);
  key = Linear(d, d, rng, false);
  value = Linear(d, d, rng);
  output = Linear(d, d, rng);
}

Tensor MultiHeadAttention::operator()(const Tensor& q, const Tensor& k, const Tensor& v) const {
  const std::size_t d = q.dim(1);
  if (d % n_heads != 0) {
    throw ConfigError("model dimension " + std::to_string(d) + " is not divisible by " +
                      std::to_string(n_heads) + " heads");
  }
  const std::size_t dh = d / n_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  Tensor Q = query(q), K = key(k), V = value(v);
  std::vector<Tensor> heads;
  heads.reserve(n_heads);
  for (std::size_t h = 0; h < n_heads; ++h) {
    Tensor qh = slice_cols(Q, h * dh, dh);
    Tensor kh = slice_cols(K, h * dh, dh);
    Tensor vh = slice_cols(V, h * dh, dh);
    Tensor scores = scale(matmul(qh, transpose(kh)), inv_sqrt);
    heads.push_back(matmul(softmax(scores, 1), vh));
  }
  return output(n_heads == 1 ? heads[0] : concat_cols(heads));
}

void MultiHeadAttention::append_parameters(const std::string& prefix, ParameterList& out) const {
  query.append_parameters(prefix + ".query", out);
  key.append_parameters(prefix + ".key", out);
  value.append_parameters(prefix + ".value", out);
  output.append_parameters(prefix + ".output", out);
}

FeedForward::FeedForward(std::size_t d, std::size_t d_ff, std::mt19937_64& rng)
    : inner(d, d_ff, rng), outer(d_ff, d, rng) {}

Tensor FeedForward::operator()(const Tensor& x) const { return outer(swish(inner(x))); }

void FeedForward::append_parameters(const std::string& prefix, ParameterList& out) const {
  inner.append_parameters(prefix + ".inner", out);
  outer.append_parameters(prefix + ".outer", out);
}

TransformerBlock::TransformerBlock(std::size_t d, std::size_t d_ff, std::size_t n_heads,
                                   double p, std::mt19937_64& rng)
    : norm1(d), norm2(d), attention(d, n_heads, rng), ffn(d, d_ff, rng), dropout(p) {}

Tensor TransformerBlock::operator()(const Tensor& x, ForwardContext& ctx) const {
  Tensor z = norm1(x);
  Tensor y = add(x, drop(attention(z, z, z), dropout, ctx));
  return add(y, drop(ffn(norm2(y)), dropout, ctx));
}

void TransformerBlock::append_parameters(const std::string& prefix, ParameterList& out) const {
  norm1.append_parameters(prefix + ".norm1", out);
  attention.append_parameters(prefix + ".attention", out);
  norm2.append_parameters(prefix + ".norm2", out);
  ffn.append_parameters(prefix + ".ffn", out);
}

ConvDownsample::ConvDownsample(std::size_t in, std::size_t out, std::mt19937_64& rng)
    : weight(init_weight({3, in, out}, 3 * in, out, rng)),
      bias(Tensor::parameter({out}, std::vector<double>(out, 0.0))) {}

Tensor ConvDownsample::operator()(const Tensor& x) const {
  return max_pool1d(swish(conv1d_same(x, weight, bias)));
}

void ConvDownsample::append_parameters(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

EncoderStack::EncoderStack(std::size_t n_blocks, std::size_t d, std::size_t d_ff,
                           std::size_t n_heads, double dropout, std::mt19937_64& rng)
    : final_norm(d) {
  blocks.reserve(n_blocks);
  for (std::size_t i = 0; i < n_blocks; ++i) blocks.emplace_back(d, d_ff, n_heads, dropout, rng);
}

Tensor EncoderStack::operator()(const Tensor& x, ForwardContext& ctx) const {
  Tensor h = x;
  for (const auto& b : blocks) h = b(h, ctx);
  return final_norm(h);
}

void EncoderStack::append_parameters(const std::string& prefix, ParameterList& out) const {
  for (std::size_t i = 0; i < blocks.size(); ++i)
    blocks[i].append_parameters(prefix + ".block" + std::to_string(i), out);
  final_norm.append_parameters(prefix + ".final_norm", out);
}

}  // namespace persona
