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

#include "sadsp/model/model.hpp"

#include <cmath>

#include "sadsp/errors.hpp"
#include "sadsp/ndkit/ops.hpp"
#include "sadsp/random.hpp"

namespace sadsp::model {

using nd::Tensor;
using nd::Var;

std::string_view module_name(Module m) {
  static constexpr std::array<std::string_view, kModuleCount> kNames = {
      "f_e", "f_s", "f_o", "f_sa", "f_oa", "f_sg", "f_og", "f_ds", "f_do", "f_s_den", "f_o_den", "f_s_dis", "f_o_dis"};
  return kNames[static_cast<std::size_t>(m)];
}

std::array<Module, kModuleCount> all_modules() {
  std::array<Module, kModuleCount> out{};
  for (std::size_t i = 0; i < kModuleCount; ++i) out[i] = static_cast<Module>(i);
  return out;
}

ParamGroup group_of(Module m) {
  switch (m) {
    case Module::trunk:
      return ParamGroup::trunk;
    case Module::f_s_den:
    case Module::f_o_den:
    case Module::f_s_dis:
    case Module::f_o_dis:
      return ParamGroup::adversary;
    default:
      return ParamGroup::other;
  }
}

namespace {

std::vector<std::size_t> layer_widths(Module m, const Dims& d) {
  const std::size_t h = d.hidden, S = d.num_states, O = d.num_objects;
  switch (m) {
    case Module::trunk:
      return {d.feature_dim, h, 2 * h};
    case Module::f_s:
    case Module::f_ds:
    case Module::f_o_den:
      return {h, S};
    case Module::f_o:
    case Module::f_do:
    case Module::f_s_den:
      return {h, O};
    case Module::f_sa:
      return {h, h, h, S};
    case Module::f_oa:
      return {h, h, h, O};
    case Module::f_sg:
    case Module::f_og:
      return {h, h, h};
    case Module::f_s_dis:
    case Module::f_o_dis:
      return {h, 1};
  }
  return {};
}

Var param_var(nd::Graph& graph, Tensor& t, bool tracked) {
  return tracked ? graph.leaf(t, true) : graph.constant(t);
}

// Generated features stay linear so no unit can be switched off for good by the
// discriminator's gradient.
constexpr bool kGeneratorReluOut = false;

// Applies a stack of linear layers with ReLU between them; `relu_out` adds a
// ReLU after the last layer as well.
struct Stack {
  std::vector<std::pair<Var, Var>> layers;

  Var apply(const Var& input, bool relu_out) const {
    Var x = input;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      x = nd::add_bias(nd::matmul(x, layers[i].first), layers[i].second);
      if (i + 1 < layers.size() || relu_out) x = nd::relu(x);
    }
    return x;
  }
};

Stack record_module(ModelParams& params, nd::Graph& graph, Module m, bool tracked) {
  Stack stack;
  for (Linear& layer : params.layers(m)) {
    stack.layers.emplace_back(param_var(graph, layer.weight, tracked), param_var(graph, layer.bias, tracked));
  }
  return stack;
}

}  // namespace

ModelParams make_params(const Dims& dims) {
  if (dims.num_states == 0 || dims.num_objects == 0 || dims.feature_dim == 0 || dims.hidden == 0) {
    throw ContractError("model dimensions must be positive");
  }
  ModelParams params;
  params.dims_ = dims;
  for (Module m : all_modules()) {
    const auto widths = layer_widths(m, dims);
    auto& layers = params.layers(m);
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
      layers.push_back(Linear{Tensor::zeros({widths[i], widths[i + 1]}, true), Tensor::zeros({widths[i + 1]}, true)});
    }
  }
  return params;
}

ModelParams ModelParams::initialize(const Dims& dims, std::uint64_t seed) {
  ModelParams params = make_params(dims);
  Rng rng(seed);
  for (Module m : all_modules()) {
    for (Linear& layer : params.layers(m)) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.shape()[0]));
      for (double& v : layer.weight.values()) v = rng.uniform(-bound, bound);
      for (double& v : layer.bias.values()) v = rng.uniform(-bound, bound);
    }
  }
  return params;
}

std::vector<std::pair<std::string, Tensor*>> ModelParams::named_tensors() {
  std::vector<std::pair<std::string, Tensor*>> out;
  for (Module m : all_modules()) {
    auto& layers = this->layers(m);
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const std::string prefix = std::string(module_name(m)) + "." + std::to_string(i);
      out.emplace_back(prefix + ".weight", &layers[i].weight);
      out.emplace_back(prefix + ".bias", &layers[i].bias);
    }
  }
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> ModelParams::named_tensors() const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (auto& [name, t] : const_cast<ModelParams*>(this)->named_tensors()) out.emplace_back(name, t);
  return out;
}

std::vector<Tensor*> ModelParams::tensors(Module m) {
  std::vector<Tensor*> out;
  for (Linear& layer : layers(m)) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

std::vector<Tensor*> ModelParams::tensors(ParamGroup g) {
  std::vector<Tensor*> out;
  for (Module m : all_modules()) {
    if (group_of(m) != g) continue;
    for (Tensor* t : tensors(m)) out.push_back(t);
  }
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : named_tensors()) n += t->size();
  return n;
}

void ModelParams::zero_grad() {
  for (auto& [name, t] : named_tensors()) t->zero_grad();
}

bool ModelParams::same_values(const ModelParams& other) const {
  if (!(dims_ == other.dims_)) return false;
  const auto a = named_tensors();
  const auto b = other.named_tensors();
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].first != b[i].first || !a[i].second->same_values(*b[i].second)) return false;
  }
  return true;
}

bool is_tracked(Module m, const ForwardOptions& options) {
  if (m == Module::trunk && options.freeze_trunk) return false;
  switch (options.phase) {
    case Phase::inference:
      return false;
    case Phase::full:
      return true;
    case Phase::generator:
      return group_of(m) != ParamGroup::adversary;
    case Phase::adversary:
      return group_of(m) == ParamGroup::adversary || m == Module::f_ds || m == Module::f_do;
  }
  return false;
}

ForwardBundle forward(ModelParams& params, nd::Graph& graph, const Tensor& features, const ForwardOptions& options) {
  const Dims& dims = params.dims();
  if (features.rank() != 2 || features.cols() != dims.feature_dim) {
    throw DimensionError("forward: features " + nd::shape_string(features.shape()) + " but model expects width " +
                         std::to_string(dims.feature_dim));
  }
  const std::size_t h = dims.hidden;
  auto stack = [&](Module m) { return record_module(params, graph, m, is_tracked(m, options)); };

  ForwardBundle b;
  b.options = options;
  b.batch = features.rows();

  const Var x = graph.constant(features);
  const Var z = stack(Module::trunk).apply(x, true);
  b.z_s = nd::slice_cols(z, 0, h);
  b.z_o = nd::slice_cols(z, h, 2 * h);

  b.p_s = nd::softmax(stack(Module::f_s).apply(b.z_s, false));
  b.p_o = nd::softmax(stack(Module::f_o).apply(b.z_o, false));
  b.a_s = nd::sigmoid(stack(Module::f_sa).apply(b.z_o, false));
  b.a_o = nd::sigmoid(stack(Module::f_oa).apply(b.z_s, false));

  b.zg_s = stack(Module::f_sg).apply(b.z_s, kGeneratorReluOut);
  b.zg_o = stack(Module::f_og).apply(b.z_o, kGeneratorReluOut);

  const Stack ds = stack(Module::f_ds), d_o = stack(Module::f_do);
  b.pd_s_real = nd::softmax(ds.apply(b.z_s, false));
  b.pd_s_gen = nd::softmax(ds.apply(b.zg_s, false));
  b.pd_o_real = nd::softmax(d_o.apply(b.z_o, false));
  b.pd_o_gen = nd::softmax(d_o.apply(b.zg_o, false));

  const Stack sden = stack(Module::f_s_den), oden = stack(Module::f_o_den);
  b.den_s_real = nd::softmax(sden.apply(b.z_s, false));
  b.den_s_gen = nd::softmax(sden.apply(b.zg_s, false));
  b.den_o_real = nd::softmax(oden.apply(b.z_o, false));
  b.den_o_gen = nd::softmax(oden.apply(b.zg_o, false));

  const Stack sdis = stack(Module::f_s_dis), odis = stack(Module::f_o_dis);
  b.dis_s_real = nd::sigmoid(sdis.apply(b.z_s, false));
  b.dis_s_gen = nd::sigmoid(sdis.apply(b.zg_s, false));
  b.dis_o_real = nd::sigmoid(odis.apply(b.z_o, false));
  b.dis_o_gen = nd::sigmoid(odis.apply(b.zg_o, false));
  return b;
}

ForwardBundle forward(const ModelParams& params, nd::Graph& graph, const Tensor& features) {
  // Nothing is tracked in inference, so the parameters are only read.
  return forward(const_cast<ModelParams&>(params), graph, features, ForwardOptions{Phase::inference, false});
}

ForwardBundle forward(const ModelParams& params, nd::Graph& graph, std::span<const double> features) {
  return forward(params, graph, Tensor::matrix(1, features.size(), {features.begin(), features.end()}));
}

std::vector<double> attention_fuse(std::span<const double> attention, std::span<const double> probs) {
  if (attention.size() != probs.size()) throw ContractError("attention_fuse: length mismatch");
  std::vector<double> out(probs.size());
  for (std::size_t k = 0; k < probs.size(); ++k) out[k] = (1.0 + attention[k]) * probs[k];
  return out;
}

Var attention_fuse(const Var& attention, const Var& probs) {
  if (attention.value().shape() != probs.value().shape()) throw ContractError("attention_fuse: shape mismatch");
  return nd::mul(nd::add_scalar(attention, 1.0), probs);
}

DisentangledProbs disentangled_probs(const ModelParams& params, std::span<const double> z_s,
                                     std::span<const double> z_o) {
  const std::size_t h = params.dims().hidden;
  if (z_s.size() != h || z_o.size() != h) throw DimensionError("disentangled_probs: features must have width h");
  nd::Graph graph;
  auto& mutable_params = const_cast<ModelParams&>(params);
  auto stack = [&](Module m) { return record_module(mutable_params, graph, m, false); };
  const Var zs = graph.constant(Tensor::matrix(1, h, {z_s.begin(), z_s.end()}));
  const Var zo = graph.constant(Tensor::matrix(1, h, {z_o.begin(), z_o.end()}));
  const Var ps = nd::softmax(stack(Module::f_ds).apply(stack(Module::f_sg).apply(zs, kGeneratorReluOut), false));
  const Var po = nd::softmax(stack(Module::f_do).apply(stack(Module::f_og).apply(zo, kGeneratorReluOut), false));
  return {row_of(ps.value(), 0), row_of(po.value(), 0)};
}

std::vector<double> row_of(const Tensor& t, std::size_t r) {
  const std::size_t cols = t.cols();
  const auto values = t.values();
  return {values.begin() + static_cast<std::ptrdiff_t>(r * cols),
          values.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)};
}

}  // namespace sadsp::model
