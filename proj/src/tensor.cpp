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

#include "persona/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace persona {

namespace {

thread_local Tape* active_tape = nullptr;

void require_finite(const char* op, std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite value produced by ") + op);
    }
  }
}

std::shared_ptr<detail::Node> new_node(Shape shape, std::vector<double> values) {
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("tensor of shape " + shape_string(shape) + " given " +
                     std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(values);
  return node;
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor Tensor::zeros(Shape shape) {
  auto n = shape_numel(shape);
  return Tensor(new_node(std::move(shape), std::vector<double>(n, 0.0)));
}

Tensor Tensor::full(Shape shape, double value) {
  auto n = shape_numel(shape);
  return Tensor(new_node(std::move(shape), std::vector<double>(n, value)));
}

Tensor Tensor::from(Shape shape, std::vector<double> values) {
  require_finite("Tensor::from", values);
  return Tensor(new_node(std::move(shape), std::move(values)));
}

Tensor Tensor::scalar(double value) { return from({}, {value}); }

Tensor Tensor::parameter(Shape shape, std::vector<double> values) {
  Tensor t = from(std::move(shape), std::move(values));
  t.node_->requires_grad = true;
  return t;
}

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                     shape_string(shape()));
  }
  return node_->shape[axis];
}

std::size_t Tensor::numel() const { return node_->data.size(); }

std::span<const double> Tensor::data() const { return node_->data; }

std::span<double> Tensor::mutable_data() { return node_->data; }

double Tensor::item() const {
  if (numel() != 1) {
    throw ShapeError("item() on tensor of shape " + shape_string(shape()));
  }
  return node_->data[0];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  if (rank() != 2) throw ShapeError("at(row, col) needs a matrix, got " + shape_string(shape()));
  return node_->data[row * node_->shape[1] + col];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }

void Tensor::set_requires_grad(bool flag) { node_->requires_grad = flag; }

bool Tensor::has_grad() const { return !node_->grad.empty(); }

std::vector<double> Tensor::grad() const {
  if (node_->grad.empty()) return std::vector<double>(numel(), 0.0);
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::clone() const { return Tensor(new_node(node_->shape, node_->data)); }

Tape::Recording::Recording(Tape& tape) : previous_(active_tape) { active_tape = &tape; }

Tape::Recording::~Recording() { active_tape = previous_; }

Tape* Tape::current() { return active_tape; }

void Tape::push(Entry entry) {
  if (consumed_) throw Error("tape already consumed by backward(); record a new forward pass");
  entries_.push_back(std::move(entry));
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined()) throw Error("backward() on an undefined tensor");
  if (loss.numel() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " + shape_string(loss.shape()));
  }
  if (consumed_) {
    throw Error("backward() called twice on the same tape; re-run the forward pass");
  }
  const auto& root = loss.node();
  auto it = std::find_if(entries_.rbegin(), entries_.rend(),
                         [&](const Entry& e) { return e.output == root; });
  if (it == entries_.rend()) throw Error("loss was not produced on this tape");
  consumed_ = true;

  root->ensure_grad();
  root->grad[0] += 1.0;
  for (; it != entries_.rend(); ++it) {
    if (it->output->grad.empty()) continue;
    it->backward();
  }
}

NoGradGuard::NoGradGuard() : previous_(active_tape) { active_tape = nullptr; }

NoGradGuard::~NoGradGuard() { active_tape = previous_; }

Tensor make_result(const char* op, Shape shape, std::vector<double> values,
                   std::vector<Tensor> inputs,
                   std::function<void(const detail::Node& out)> backward) {
  require_finite(op, values);
  auto out = new_node(std::move(shape), std::move(values));
  Tape* tape = active_tape;
  if (tape == nullptr) return Tensor(out);

  bool needs_grad = std::any_of(inputs.begin(), inputs.end(),
                                [](const Tensor& t) { return t.requires_grad(); });
  if (!needs_grad) return Tensor(out);

  out->requires_grad = true;
  Tape::Entry entry;
  entry.op = op;
  entry.inputs.reserve(inputs.size());
  for (auto& t : inputs) entry.inputs.push_back(t.node());
  entry.output = out;
  detail::Node* raw = out.get();
  entry.backward = [fn = std::move(backward), raw] { fn(*raw); };
  tape->push(std::move(entry));
  return Tensor(out);
}

}  // namespace persona
