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

#include "persona/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace persona {

namespace {

using detail::Node;

void require_rank(const char* op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) +
                     ", got shape " + shape_string(t.shape()));
  }
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

// Accumulates into n->grad when n takes gradients; returns nullptr otherwise.
double* grad_sink(Node* n) {
  if (!n->requires_grad) return nullptr;
  n->ensure_grad();
  return n->grad.data();
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: cannot multiply " + shape_string(a.shape()) + " by " +
                     shape_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      if (av == 0.0) continue;
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
    }
  }
  Node* an = a.node().get();
  Node* bn = b.node().get();
  return make_result("matmul", {m, n}, std::move(out), {a, b}, [an, bn, m, k, n](const Node& o) {
    const double* g = o.grad.data();
    if (double* ga = grad_sink(an)) {
      const double* pb = bn->data.data();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          const double* grow = g + i * n;
          const double* brow = pb + p * n;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          ga[i * k + p] += acc;
        }
      }
    }
    if (double* gb = grad_sink(bn)) {
      const double* pa = an->data.data();
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double av = pa[i * k + p];
          double* dst = gb + p * n;
          for (std::size_t j = 0; j < n; ++j) dst[j] += av * grow[j];
        }
      }
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_rank("transpose", a, 2);
  const std::size_t r = a.dim(0), c = a.dim(1);
  std::vector<double> out(r * c);
  auto src = a.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = src[i * c + j];
  Node* an = a.node().get();
  return make_result("transpose", {c, r}, std::move(out), {a}, [an, r, c](const Node& o) {
    if (double* ga = grad_sink(an)) {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += o.grad[j * r + i];
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  std::vector<double> out(a.numel());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  Node* an = a.node().get();
  Node* bn = b.node().get();
  return make_result("add", a.shape(), std::move(out), {a, b}, [an, bn](const Node& o) {
    for (Node* n : {an, bn}) {
      if (double* g = grad_sink(n)) {
        for (std::size_t i = 0; i < o.grad.size(); ++i) g[i] += o.grad[i];
      }
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  std::vector<double> out(a.numel());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  Node* an = a.node().get();
  Node* bn = b.node().get();
  return make_result("sub", a.shape(), std::move(out), {a, b}, [an, bn](const Node& o) {
    if (double* g = grad_sink(an))
      for (std::size_t i = 0; i < o.grad.size(); ++i) g[i] += o.grad[i];
    if (double* g = grad_sink(bn))
      for (std::size_t i = 0; i < o.grad.size(); ++i) g[i] -= o.grad[i];
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  std::vector<double> out(a.numel());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  Node* an = a.node().get();
  Node* bn = b.node().get();
  return make_result("mul", a.shape(), std::move(out), {a, b}, [an, bn](const Node& o) {
    if (double* g = grad_sink(an))
      for (std::size_t i = 0; i < o.grad.size(); ++i) g[i] += o.grad[i] * bn->data[i];
    if (double* g = grad_sink(bn))
      for (std::size_t i = 0; i < o.grad.size(); ++i) g[i] += o.grad[i] * an->data[i];
  });
}

Tensor scale(const Tensor& x, double factor) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (auto& v : out) v *= factor;
  Node* xn = x.node().get();
  return make_result("scale", x.shape(), std::move(out), {x}, [xn, factor](const Node& o) {
    if (double* g = grad_sink(xn))
      for (std::size_t i = 0; i < o.grad.size(); ++i) g[i] += factor * o.grad[i];
  });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  if (x.rank() == 0 || bias.rank() != 1 || x.shape().back() != bias.dim(0)) {
    throw ShapeError("add_bias: cannot broadcast " + shape_string(bias.shape()) + " onto " +
                     shape_string(x.shape()));
  }
  const std::size_t d = bias.dim(0);
  std::vector<double> out(x.data().begin(), x.data().end());
  auto b = bias.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i % d];
  Node* xn = x.node().get();
  Node* bn = bias.node().get();
  return make_result("add_bias", x.shape(), std::move(out), {x, bias}, [xn, bn, d](const Node& o) {
    if (double* g = grad_sink(xn))
      for (std::size_t i = 0; i < o.grad.size(); ++i) g[i] += o.grad[i];
    if (double* g = grad_sink(bn))
      for (std::size_t i = 0; i < o.grad.size(); ++i) g[i % d] += o.grad[i];
  });
}

Tensor sum(const Tensor& x) {
  auto v = x.data();
  double total = std::accumulate(v.begin(), v.end(), 0.0);
  Node* xn = x.node().get();
  return make_result("sum", {}, {total}, {x}, [xn](const Node& o) {
    if (double* g = grad_sink(xn))
      for (std::size_t i = 0; i < xn->data.size(); ++i) g[i] += o.grad[0];
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor abs(const Tensor& x) {
  std::vector<double> out(x.numel());
  auto v = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::fabs(v[i]);
  Node* xn = x.node().get();
  return make_result("abs", x.shape(), std::move(out), {x}, [xn](const Node& o) {
    if (double* g = grad_sink(xn)) {
      for (std::size_t i = 0; i < o.grad.size(); ++i) {
        const double s = xn->data[i] > 0 ? 1.0 : (xn->data[i] < 0 ? -1.0 : 0.0);
        g[i] += s * o.grad[i];
      }
    }
  });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw ShapeError("softmax: axis " + std::to_string(axis) + " out of range for shape " +
                     shape_string(x.shape()));
  }
  const auto& s = x.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t n = s[axis];
  auto v = x.data();
  std::vector<double> out(v.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * n * inner + in;
      double mx = v[base];
      for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, v[base + j * inner]);
      double z = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double e = std::exp(v[base + j * inner] - mx);
        out[base + j * inner] = e;
        z += e;
      }
      for (std::size_t j = 0; j < n; ++j) out[base + j * inner] /= z;
    }
  }
  Node* xn = x.node().get();
  return make_result("softmax", s, std::move(out), {x}, [xn, outer, inner, n](const Node& o) {
    double* g = grad_sink(xn);
    if (!g) return;
    for (std::size_t a = 0; a < outer; ++a) {
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = a * n * inner + in;
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += o.grad[base + j * inner] * o.data[base + j * inner];
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t idx = base + j * inner;
          g[idx] += o.data[idx] * (o.grad[idx] - dot);
        }
      }
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  if (!(eps > 0)) throw ConfigError("layer_norm: eps must be positive");
  if (x.rank() == 0 || gamma.rank() != 1 || beta.rank() != 1 || gamma.dim(0) != x.shape().back() ||
      beta.dim(0) != x.shape().back()) {
    throw ShapeError("layer_norm: gamma " + shape_string(gamma.shape()) + ", beta " +
                     shape_string(beta.shape()) + " do not match input " + shape_string(x.shape()));
  }
  const std::size_t d = x.shape().back();
  const std::size_t rows = x.numel() / d;
  auto v = x.data();
  auto gm = gamma.data(), bt = beta.data();
  std::vector<double> out(v.size());
  auto xhat = std::make_shared<std::vector<double>>(v.size());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = v.data() + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (row[j] - mu) * is;
      (*xhat)[r * d + j] = h;
      out[r * d + j] = gm[j] * h + bt[j];
    }
  }
  Node* xn = x.node().get();
  Node* gn = gamma.node().get();
  Node* bn = beta.node().get();
  return make_result(
      "layer_norm", x.shape(), std::move(out), {x, gamma, beta},
      [xn, gn, bn, xhat, inv_std, rows, d](const Node& o) {
        if (double* gg = grad_sink(gn))
          for (std::size_t i = 0; i < o.grad.size(); ++i) gg[i % d] += o.grad[i] * (*xhat)[i];
        if (double* gb = grad_sink(bn))
          for (std::size_t i = 0; i < o.grad.size(); ++i) gb[i % d] += o.grad[i];
        double* gx = grad_sink(xn);
        if (!gx) return;
        const double inv_d = 1.0 / static_cast<double>(d);
        for (std::size_t r = 0; r < rows; ++r) {
          double m1 = 0.0, m2 = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            const double dh = o.grad[r * d + j] * gn->data[j];
            m1 += dh;
            m2 += dh * (*xhat)[r * d + j];
          }
          m1 *= inv_d;
          m2 *= inv_d;
          for (std::size_t j = 0; j < d; ++j) {
            const double dh = o.grad[r * d + j] * gn->data[j];
            gx[r * d + j] += (*inv_std)[r] * (dh - m1 - (*xhat)[r * d + j] * m2);
          }
        }
      });
}

Activation parse_activation(std::string_view name) {
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "swish") return Activation::swish;
  if (name == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

Tensor activation(const Tensor& x, Activation kind) {
  switch (kind) {
    case Activation::sigmoid:
      return sigmoid(x);
    case Activation::swish:
      return swish(x);
    case Activation::tanh:
      return tanh(x);
  }
  throw ConfigError("unknown activation");
}

Tensor sigmoid(const Tensor& x) {
  std::vector<double> out(x.numel());
  auto v = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid_scalar(v[i]);
  Node* xn = x.node().get();
  return make_result("sigmoid", x.shape(), std::move(out), {x}, [xn](const Node& o) {
    if (double* g = grad_sink(xn))
      for (std::size_t i = 0; i < o.grad.size(); ++i) g[i] += o.grad[i] * o.data[i] * (1.0 - o.data[i]);
  });
}

Tensor swish(const Tensor& x) {
  std::vector<double> out(x.numel());
  auto v = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] * sigmoid_scalar(v[i]);
  Node* xn = x.node().get();
  return make_result("swish", x.shape(), std::move(out), {x}, [xn](const Node& o) {
    if (double* g = grad_sink(xn)) {
      for (std::size_t i = 0; i < o.grad.size(); ++i) {
        const double s = sigmoid_scalar(xn->data[i]);
        g[i] += o.grad[i] * (s + xn->data[i] * s * (1.0 - s));
      }
    }
  });
}

Tensor tanh(const Tensor& x) {
  std::vector<double> out(x.numel());
  auto v = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(v[i]);
  Node* xn = x.node().get();
  return make_result("tanh", x.shape(), std::move(out), {x}, [xn](const Node& o) {
    if (double* g = grad_sink(xn))
      for (std::size_t i = 0; i < o.grad.size(); ++i) g[i] += o.grad[i] * (1.0 - o.data[i] * o.data[i]);
  });
}

Tensor conv1d_same(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank("conv1d_same", x, 2);
  if (weight.rank() != 3 || weight.dim(0) % 2 == 0 || weight.dim(1) != x.dim(1) ||
      bias.rank() != 1 || bias.dim(0) != weight.dim(2)) {
    throw ShapeError("conv1d_same: weight " + shape_string(weight.shape()) + ", bias " +
                     shape_string(bias.shape()) + " incompatible with input " +
                     shape_string(x.shape()));
  }
  const std::size_t T = x.dim(0), cin = x.dim(1), k = weight.dim(0), cout = weight.dim(2);
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(k / 2);
  std::vector<double> out(T * cout);
  auto xv = x.data(), wv = weight.data(), bv = bias.data();
  for (std::size_t t = 0; t < T; ++t) {
    double* row = out.data() + t * cout;
    std::copy(bv.begin(), bv.end(), row);
    for (std::size_t j = 0; j < k; ++j) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(j) - half;
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(T)) continue;
      const double* xrow = xv.data() + static_cast<std::size_t>(src) * cin;
      const double* wj = wv.data() + j * cin * cout;
      for (std::size_t i = 0; i < cin; ++i) {
        const double a = xrow[i];
        if (a == 0.0) continue;
        const double* wrow = wj + i * cout;
        for (std::size_t o = 0; o < cout; ++o) row[o] += a * wrow[o];
      }
    }
  }
  Node* xn = x.node().get();
  Node* wn = weight.node().get();
  Node* bn = bias.node().get();
  return make_result(
      "conv1d_same", {T, cout}, std::move(out), {x, weight, bias},
      [xn, wn, bn, T, cin, k, cout, half](const Node& o) {
        const double* g = o.grad.data();
        if (double* gb = grad_sink(bn))
          for (std::size_t t = 0; t < T; ++t)
            for (std::size_t c = 0; c < cout; ++c) gb[c] += g[t * cout + c];
        double* gw = grad_sink(wn);
        double* gx = grad_sink(xn);
        for (std::size_t t = 0; t < T; ++t) {
          const double* grow = g + t * cout;
          for (std::size_t j = 0; j < k; ++j) {
            const std::ptrdiff_t src =
                static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(j) - half;
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(T)) continue;
            const std::size_t s = static_cast<std::size_t>(src);
            for (std::size_t i = 0; i < cin; ++i) {
              const std::size_t wbase = (j * cin + i) * cout;
              if (gw) {
                const double a = xn->data[s * cin + i];
                for (std::size_t c = 0; c < cout; ++c) gw[wbase + c] += a * grow[c];
              }
              if (gx) {
                double acc = 0.0;
                for (std::size_t c = 0; c < cout; ++c) acc += wn->data[wbase + c] * grow[c];
                gx[s * cin + i] += acc;
              }
            }
          }
        }
      });
}

Tensor max_pool1d(const Tensor& x) {
  require_rank("max_pool1d", x, 2);
  const std::size_t T = x.dim(0), d = x.dim(1);
  const std::size_t To = (T + 1) / 2;
  std::vector<double> out(To * d);
  auto argmax = std::make_shared<std::vector<std::size_t>>(To * d);
  auto v = x.data();
  for (std::size_t s = 0; s < To; ++s) {
    for (std::size_t c = 0; c < d; ++c) {
      std::size_t best = 2 * s;
      if (2 * s + 1 < T && v[(2 * s + 1) * d + c] > v[best * d + c]) best = 2 * s + 1;
      out[s * d + c] = v[best * d + c];
      (*argmax)[s * d + c] = best * d + c;
    }
  }
  Node* xn = x.node().get();
  return make_result("max_pool1d", {To, d}, std::move(out), {x}, [xn, argmax](const Node& o) {
    if (double* g = grad_sink(xn))
      for (std::size_t i = 0; i < o.grad.size(); ++i) g[(*argmax)[i]] += o.grad[i];
  });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t d = parts[0].rank() == 2 ? parts[0].dim(1) : 0;
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.rank() != 2 || p.dim(1) != d) {
      throw ShapeError("concat_rows: width mismatch " + shape_string(parts[0].shape()) + " vs " +
                       shape_string(p.shape()));
    }
    rows += p.dim(0);
  }
  std::vector<double> out;
  out.reserve(rows * d);
  std::vector<Node*> nodes;
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  for (const auto& p : parts) {
    out.insert(out.end(), p.data().begin(), p.data().end());
    nodes.push_back(p.node().get());
  }
  return make_result("concat_rows", {rows, d}, std::move(out), std::move(inputs),
                     [nodes](const Node& o) {
                       std::size_t offset = 0;
                       for (Node* n : nodes) {
                         if (double* g = grad_sink(n))
                           for (std::size_t i = 0; i < n->data.size(); ++i) g[i] += o.grad[offset + i];
                         offset += n->data.size();
                       }
                     });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = parts[0].rank() == 2 ? parts[0].dim(0) : 0;
  std::size_t cols = 0;
  for (const auto& p : parts) {
    if (p.rank() != 2 || p.dim(0) != rows) {
      throw ShapeError("concat_cols: height mismatch " + shape_string(parts[0].shape()) + " vs " +
                       shape_string(p.shape()));
    }
    cols += p.dim(1);
  }
  std::vector<double> out(rows * cols);
  std::vector<Node*> nodes;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.dim(1);
    auto v = p.data();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(v.data() + r * w, w, out.data() + r * cols + offset);
    offset += w;
    nodes.push_back(p.node().get());
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return make_result("concat_cols", {rows, cols}, std::move(out), std::move(inputs),
                     [nodes, rows, cols](const Node& o) {
                       std::size_t off = 0;
                       for (Node* n : nodes) {
                         const std::size_t w = n->shape[1];
                         if (double* g = grad_sink(n))
                           for (std::size_t r = 0; r < rows; ++r)
                             for (std::size_t c = 0; c < w; ++c) g[r * w + c] += o.grad[r * cols + off + c];
                         off += w;
                       }
                     });
}

Tensor slice_rows(const Tensor& x, std::size_t start, std::size_t count) {
  require_rank("slice_rows", x, 2);
  if (start + count > x.dim(0) || count == 0) {
    throw ShapeError("slice_rows: rows [" + std::to_string(start) + ", " +
                     std::to_string(start + count) + ") outside " + shape_string(x.shape()));
  }
  const std::size_t d = x.dim(1);
  auto v = x.data();
  std::vector<double> out(v.begin() + static_cast<std::ptrdiff_t>(start * d),
                          v.begin() + static_cast<std::ptrdiff_t>((start + count) * d));
  Node* xn = x.node().get();
  return make_result("slice_rows", {count, d}, std::move(out), {x}, [xn, start, d](const Node& o) {
    if (double* g = grad_sink(xn))
      for (std::size_t i = 0; i < o.grad.size(); ++i) g[start * d + i] += o.grad[i];
  });
}

Tensor slice_cols(const Tensor& x, std::size_t start, std::size_t count) {
  require_rank("slice_cols", x, 2);
  if (start + count > x.dim(1) || count == 0) {
    throw ShapeError("slice_cols: columns [" + std::to_string(start) + ", " +
                     std::to_string(start + count) + ") outside " + shape_string(x.shape()));
  }
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  auto v = x.data();
  std::vector<double> out(rows * count);
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(v.data() + r * cols + start, count, out.data() + r * count);
  Node* xn = x.node().get();
  return make_result("slice_cols", {rows, count}, std::move(out), {x},
                     [xn, rows, cols, start, count](const Node& o) {
                       if (double* g = grad_sink(xn))
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t c = 0; c < count; ++c)
                             g[r * cols + start + c] += o.grad[r * count + c];
                     });
}

Tensor gather_rows(const Tensor& table, std::span<const std::size_t> ids) {
  require_rank("gather_rows", table, 2);
  if (ids.empty()) throw ShapeError("gather_rows: empty index list");
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  std::vector<double> out(ids.size() * d);
  auto v = table.data();
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] >= vocab) {
      throw RangeError("gather_rows: index " + std::to_string(ids[t]) + " outside table of " +
                       std::to_string(vocab) + " rows");
    }
    std::copy_n(v.data() + ids[t] * d, d, out.data() + t * d);
  }
  Node* tn = table.node().get();
  std::vector<std::size_t> idx(ids.begin(), ids.end());
  return make_result("gather_rows", {ids.size(), d}, std::move(out), {table},
                     [tn, idx = std::move(idx), d](const Node& o) {
                       if (double* g = grad_sink(tn))
                         for (std::size_t t = 0; t < idx.size(); ++t)
                           for (std::size_t c = 0; c < d; ++c) g[idx[t] * d + c] += o.grad[t * d + c];
                     });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape: cannot view " + shape_string(x.shape()) + " as " +
                     shape_string(shape));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  Node* xn = x.node().get();
  return make_result("reshape", std::move(shape), std::move(out), {x}, [xn](const Node& o) {
    if (double* g = grad_sink(xn))
      for (std::size_t i = 0; i < o.grad.size(); ++i) g[i] += o.grad[i];
  });
}

Tensor dropout(const Tensor& x, double p, bool training, std::mt19937_64& rng) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout probability must lie in [0, 1)");
  if (!training || p == 0.0) return x;
  std::bernoulli_distribution keep(1.0 - p);
  const double s = 1.0 / (1.0 - p);
  auto mask = std::make_shared<std::vector<double>>(x.numel());
  std::vector<double> out(x.numel());
  auto v = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    (*mask)[i] = keep(rng) ? s : 0.0;
    out[i] = v[i] * (*mask)[i];
  }
  Node* xn = x.node().get();
  return make_result("dropout", x.shape(), std::move(out), {x}, [xn, mask](const Node& o) {
    if (double* g = grad_sink(xn))
      for (std::size_t i = 0; i < o.grad.size(); ++i) g[i] += o.grad[i] * (*mask)[i];
  });
}

}  // namespace persona
