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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sadsp/ndkit/graph.hpp"
#include "sadsp/ndkit/tensor.hpp"

namespace sadsp::model {

struct Dims {
  std::size_t num_states = 0;
  std::size_t num_objects = 0;
  std::size_t feature_dim = 0;
  std::size_t hidden = 64;

  bool operator==(const Dims&) const = default;
};

// The thirteen subnetworks, in canonical (checkpoint) order.
enum class Module : std::size_t {
  trunk,    // f_e: d -> h -> 2h, emits z_s (first h) and z_o (last h)
  f_s,      // h -> |S|
  f_o,      // h -> |O|
  f_sa,     // z_o: h -> h -> h -> |S|, sigmoid
  f_oa,     // z_s: h -> h -> h -> |O|, sigmoid
  f_sg,     // h -> h -> h generator, linear output
  f_og,     // h -> h -> h generator, linear output
  f_ds,     // h -> |S|
  f_do,     // h -> |O|
  f_s_den,  // state features -> |O|
  f_o_den,  // object features -> |S|
  f_s_dis,  // h -> 1, sigmoid
  f_o_dis,  // h -> 1, sigmoid
};
inline constexpr std::size_t kModuleCount = 13;

std::string_view module_name(Module m);
std::array<Module, kModuleCount> all_modules();

// Learning-rate groups.
enum class ParamGroup { trunk, adversary, other };
ParamGroup group_of(Module m);

// y = x W + b, W stored in x out.
struct Linear {
  nd::Tensor weight;
  nd::Tensor bias;
};

class ModelParams {
 public:
  ModelParams() = default;

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias.
  static ModelParams initialize(const Dims& dims, std::uint64_t seed);

  const Dims& dims() const { return dims_; }
  std::vector<Linear>& layers(Module m) { return modules_[static_cast<std::size_t>(m)]; }
  const std::vector<Linear>& layers(Module m) const { return modules_[static_cast<std::size_t>(m)]; }

  // Canonical order: modules in enum order, layers in order, weight before bias.
  std::vector<std::pair<std::string, nd::Tensor*>> named_tensors();
  std::vector<std::pair<std::string, const nd::Tensor*>> named_tensors() const;
  std::vector<nd::Tensor*> tensors(Module m);
  std::vector<nd::Tensor*> tensors(ParamGroup g);

  std::size_t parameter_count() const;
  void zero_grad();
  // Bitwise equality of every value.
  bool same_values(const ModelParams& other) const;

 private:
  friend ModelParams make_params(const Dims& dims);
  Dims dims_;
  std::array<std::vector<Linear>, kModuleCount> modules_;
};

// Allocates correctly shaped, zero-valued parameters.
ModelParams make_params(const Dims& dims);

// Which parameters become tracked leaves in a forward pass.
enum class Phase {
  inference,  // nothing tracked
  generator,  // everything except f_den / f_dis
  adversary,  // f_d, f_den, f_dis only; features arrive as constants
  full,       // everything; used by gradient checks
};

struct ForwardOptions {
  Phase phase = Phase::inference;
  // Keeps the trunk constant in every phase (fixed-trunk regime).
  bool freeze_trunk = false;
};

bool is_tracked(Module m, const ForwardOptions& options);

// Every intermediate of one batched forward pass, still linked to its graph.
// Row i of each matrix belongs to sample i.
struct ForwardBundle {
  ForwardOptions options;
  std::size_t batch = 0;

  nd::Var z_s, z_o;          // B x h
  nd::Var p_s, p_o;          // B x |S|, B x |O|
  nd::Var a_s, a_o;          // attention, a_s = f_sa(z_o), a_o = f_oa(z_s)
  nd::Var zg_s, zg_o;        // generated (disentangled) features, B x h
  nd::Var pd_s_real, pd_s_gen;   // f_ds on z_s, z'_s
  nd::Var pd_o_real, pd_o_gen;   // f_do on z_o, z'_o
  nd::Var den_s_real, den_s_gen; // softmax f_s_den on z_s, z'_s (over objects)
  nd::Var den_o_real, den_o_gen; // softmax f_o_den on z_o, z'_o (over states)
  nd::Var dis_s_real, dis_s_gen; // f_s_dis, B x 1
  nd::Var dis_o_real, dis_o_gen; // f_o_dis, B x 1
};

// features: B x d. Throws DimensionError when d disagrees with the params.
ForwardBundle forward(ModelParams& params, nd::Graph& graph, const nd::Tensor& features,
                      const ForwardOptions& options);

// Inference: nothing tracked, params untouched.
ForwardBundle forward(const ModelParams& params, nd::Graph& graph, const nd::Tensor& features);
ForwardBundle forward(const ModelParams& params, nd::Graph& graph, std::span<const double> features);

// (1 + a) * p elementwise; the training-time attention fusion.
std::vector<double> attention_fuse(std::span<const double> attention, std::span<const double> probs);
nd::Var attention_fuse(const nd::Var& attention, const nd::Var& probs);

struct DisentangledProbs {
  std::vector<double> state;   // softmax f_ds(f_sg(z_s))
  std::vector<double> object;  // softmax f_do(f_og(z_o))
};
DisentangledProbs disentangled_probs(const ModelParams& params, std::span<const double> z_s,
                                     std::span<const double> z_o);

// Row r of a B x n value as a vector.
std::vector<double> row_of(const nd::Tensor& t, std::size_t r);

}  // namespace sadsp::model
