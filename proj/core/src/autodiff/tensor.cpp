/**
 * Copyright 2026 The Cellformer Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "cellformer/autodiff/tensor.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "cellformer/error.hpp"

namespace cellformer::ad {
namespace {

thread_local bool g_grad_enabled = true;

}  // namespace

std::string ShapeString(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::size_t ShapeSize(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor Tensor::Constant(Shape shape, std::vector<double> values) {
  if (shape.size() > 2) throw ShapeError("tensor rank above 2: " + ShapeString(shape));
  if (ShapeSize(shape) != values.size()) {
    throw ShapeError("shape " + ShapeString(shape) + " does not hold " +
                     std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->op = "const";
  return Tensor(std::move(node));
}

Tensor Tensor::Zeros(Shape shape, bool requires_grad) {
  const std::size_t n = ShapeSize(shape);
  Tensor t = Constant(std::move(shape), std::vector<double>(n, 0.0));
  if (requires_grad) {
    t.node_->requires_grad = true;
    t.node_->op = "var";
  }
  return t;
}

Tensor Tensor::Scalar(double value) { return Constant({}, {value}); }

Tensor Tensor::Variable(Shape shape, std::vector<double> values) {
  Tensor t = Constant(std::move(shape), std::move(values));
  t.node_->requires_grad = true;
  t.node_->op = "var";
  return t;
}

std::size_t Tensor::rows() const { return rank() == 2 ? shape()[0] : 1; }

std::size_t Tensor::cols() const {
  switch (rank()) {
    case 0:
      return 1;
    case 1:
      return shape()[0];
    default:
      return shape()[1];
  }
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on tensor of shape " + ShapeString(shape()));
  return node_->value[0];
}

void Tensor::zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

void Tensor::backward() const {
  if (!defined() || rank() != 0) {
    throw ShapeError("backward() needs a scalar, got shape " +
                     (defined() ? ShapeString(shape()) : std::string("<undefined>")));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS; graphs from deep encoder stacks overflow recursion.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* node : order) {
    if (!node->is_leaf()) node->grad.assign(node->value.size(), 0.0);
  }
  node_->mutable_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward) node->backward(*node);
  }
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool GradEnabled() { return g_grad_enabled; }

Tensor MakeResult(Shape shape, std::vector<double> value, std::string op,
                  std::vector<Tensor> parents, std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->op = std::move(op);
  if (g_grad_enabled) {
    const bool any = std::any_of(parents.begin(), parents.end(),
                                 [](const Tensor& p) { return p.requires_grad(); });
    if (any) {
      node->requires_grad = true;
      node->parents.reserve(parents.size());
      for (auto& p : parents) node->parents.push_back(p.node());
      node->backward = std::move(backward);
    }
  }
  return Tensor(std::move(node));
}

void DumpGraph(const Tensor& root, std::ostream& out) {
  std::unordered_map<const Node*, std::size_t> ids;
  std::vector<const Node*> pending{root.node().get()};
  ids.emplace(root.node().get(), 0);
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const Node* node = pending[i];
    out << ids[node] << ' ' << node->op << ' ' << ShapeString(node->shape);
    if (!node->parents.empty()) out << " <-";
    for (const auto& parent : node->parents) {
      auto [it, inserted] = ids.emplace(parent.get(), ids.size());
      if (inserted) pending.push_back(parent.get());
      out << ' ' << it->second;
    }
    out << '\n';
  }
}

}  // namespace cellformer::ad
