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

#include "sadsp/ndkit/graph.hpp"

#include <algorithm>

#include "sadsp/errors.hpp"

namespace sadsp::nd {

const Tensor& Var::value() const { return graph_->value(id_); }

bool Var::requires_grad() const { return graph_->requires_grad(id_); }

Var Graph::constant(Tensor value) {
  value.set_requires_grad(false);
  nodes_.push_back(Node{std::move(value), {}, nullptr, nullptr, false, {}});
  return Var(this, nodes_.size() - 1);
}

Var Graph::leaf(Tensor& param, bool track) {
  if (!track || !param.requires_grad()) {
    return constant(Tensor(param.shape(), std::vector<double>(param.values().begin(), param.values().end())));
  }
  Tensor copy(param.shape(), std::vector<double>(param.values().begin(), param.values().end()));
  nodes_.push_back(Node{std::move(copy), {}, nullptr, &param, true, {}});
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(Tensor value, std::vector<std::size_t> parents, BackwardFn backward) {
  const bool tracked = std::any_of(parents.begin(), parents.end(),
                                   [this](std::size_t p) { return nodes_[p].requires_grad; });
  if (!tracked) backward = nullptr;
  nodes_.push_back(Node{std::move(value), std::move(parents), std::move(backward), nullptr, tracked, {}});
  return Var(this, nodes_.size() - 1);
}

std::span<double> Graph::grad_of(std::size_t id) {
  Node& node = nodes_[id];
  if (node.grad.empty()) node.grad.assign(node.value.size(), 0.0);
  return node.grad;
}

void Graph::backward(const Var& loss) {
  if (loss.graph() != this) throw ContractError("backward on a Var from another graph");
  if (value(loss.id()).size() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        shape_string(value(loss.id()).shape()));
  }
  for (Node& node : nodes_) node.grad.clear();
  if (!nodes_[loss.id()].requires_grad) return;
  grad_of(loss.id())[0] = 1.0;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.requires_grad || node.grad.empty()) continue;
    if (node.param != nullptr) {
      node.param->accumulate_grad(node.grad);
    } else if (node.backward) {
      node.backward(*this, node.grad);
    }
  }
}

}  // namespace sadsp::nd
