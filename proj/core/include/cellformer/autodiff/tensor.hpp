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
#ifndef CELLFORMER_AUTODIFF_TENSOR_HPP_
#define CELLFORMER_AUTODIFF_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace cellformer::ad {

// Tensors have rank 0 (scalar), 1 (vector) or 2 (row-major matrix).
using Shape = std::vector<std::size_t>;

std::string ShapeString(const Shape& shape);
std::size_t ShapeSize(const Shape& shape);

struct Node;
using NodePtr = std::shared_ptr<Node>;

// One vertex of the backward graph. Interior nodes hold a closure that reads
// their own grad and accumulates into their parents.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  std::string op;
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backward;
  bool requires_grad = false;

  bool is_leaf() const { return parents.empty(); }
  // Lazily sized gradient buffer.
  std::vector<double>& mutable_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

// Handle to a graph node. Copies share the node, so a parameter tensor held
// by a model and referenced from many graphs accumulates one gradient.
class Tensor {
 public:
  Tensor() = default;

  static Tensor Constant(Shape shape, std::vector<double> values);
  static Tensor Zeros(Shape shape, bool requires_grad = false);
  static Tensor Scalar(double value);
  // Leaf that accumulates gradients.
  static Tensor Variable(Shape shape, std::vector<double> values);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->value.size(); }
  // Matrix view: rank 0 is 1x1 and rank 1 is a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> values() { return node_->value; }
  std::span<const double> values() const { return node_->value; }
  double operator[](std::size_t i) const { return node_->value[i]; }
  double at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }
  double item() const;

  // Empty span until a backward pass has reached this node.
  std::span<const double> grad() const { return node_->grad; }
  void zero_grad();
  bool requires_grad() const { return node_->requires_grad; }
  const std::string& op() const { return node_->op; }

  // Reverse-mode accumulation from a rank-0 tensor. Interior gradients are
  // recomputed on every call; leaf gradients accumulate until zero_grad().
  void backward() const;

  const NodePtr& node() const { return node_; }
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}

 private:
  NodePtr node_;
};

// While alive, new operations record no graph edges on this thread.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool GradEnabled();

// Builds the result node of an operation. `backward` is dropped when no
// parent requires a gradient or recording is disabled.
Tensor MakeResult(Shape shape, std::vector<double> value, std::string op,
                  std::vector<Tensor> parents, std::function<void(Node&)> backward);

// Text edge list of the graph reachable from `root`: "id op shape <- parent ids".
void DumpGraph(const Tensor& root, std::ostream& out);

}  // namespace cellformer::ad

#endif  // CELLFORMER_AUTODIFF_TENSOR_HPP_
