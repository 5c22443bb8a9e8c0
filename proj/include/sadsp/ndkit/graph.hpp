/*
 * Copyright 2026 The sadsp Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sadsp/ndkit/tensor.hpp"

namespace sadsp::nd {

class Graph;

// Handle to a node recorded on a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph* graph() const { return graph_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  bool requires_grad() const;
  bool valid() const { return graph_ != nullptr; }

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

// Tape of executed operations. Nodes are appended in execution order, so
// walking the tape backwards is a reverse topological order.
class Graph {
 public:
  // Receives the gradient flowing into the node and scatters it to parents.
  using BackwardFn = std::function<void(Graph&, std::span<const double>)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);

  // Records `param` as a leaf. When `track` is false (or the tensor does not
  // require grad) the value is copied in as a constant and no gradient reaches it.
  Var leaf(Tensor& param, bool track = true);

  Var record(Tensor value, std::vector<std::size_t> parents, BackwardFn backward);

  // Fills every tracked leaf's Tensor::grad with dLoss/dLeaf (accumulating).
  void backward(const Var& loss);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Gradient buffer of a node during backward; allocated on first use.
  std::span<double> grad_of(std::size_t id);

 private:
  struct Node {
    Tensor value;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    Tensor* param = nullptr;
    bool requires_grad = false;
    std::vector<double> grad;
  };

  std::vector<Node> nodes_;
};

}  // namespace sadsp::nd
