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
#include <span>
#include <vector>

#include "sadsp/model/model.hpp"
#include "sadsp/ndkit/graph.hpp"

namespace sadsp::losses {

// Ground-truth indices, one per bundle row.
struct Labels {
  std::vector<std::size_t> states;
  std::vector<std::size_t> objects;
};

// All terms are batch means. Minimize-phase and maximize-phase halves of the
// min-max objectives are separate functions; the maximize halves are written
// as quantities to minimize.

// -log p_s[s] - log p_o[o]
nd::Var loss_sp(const model::ForwardBundle& b, const Labels& y);

// -log((1 + a_s[s]) p_s[s]) - log((1 + a_o[o]) p_o[o]); negative once the fused value exceeds 1.
nd::Var loss_att(const model::ForwardBundle& b, const Labels& y);

// Cross-entropy of f_ds / f_do on real and generated features, averaged over both.
nd::Var loss_dc(const model::ForwardBundle& b, const Labels& y);

// Denoisers against one-hot targets on real and generated features:
// (1/|S|) ||den_o - 1_s||^2 + (1/|O|) ||den_s - 1_o||^2, averaged over both sets.
nd::Var loss_den_max(const model::ForwardBundle& b, const Labels& y);

// Denoisers on generated features against the uniform distribution, same scaling.
nd::Var loss_den_min(const model::ForwardBundle& b);

// -[log D(z) + log(1 - D(z'))] for both discriminators.
nd::Var loss_dis_max(const model::ForwardBundle& b);

// -[log D_s(z'_s) + log D_o(z'_o)]
nd::Var loss_dis_min(const model::ForwardBundle& b);

enum class Objective { generator_phase, adversary_phase };

struct LossReport {
  double l_sp = 0.0;
  double l_att = 0.0;
  double l_dc = 0.0;
  double l_den_max = 0.0;
  double l_den_min = 0.0;
  double l_dis_max = 0.0;
  double l_dis_min = 0.0;
  double l_total = 0.0;

  bool all_finite() const;
};

struct LossTerms {
  nd::Var total;
  LossReport report;
};

// generator_phase: l_sp + l_att + l_dc + l_den_min + l_dis_min
// adversary_phase: l_dc + l_den_max + l_dis_max
// Every component is reported whichever objective is chosen. The bundle's
// phase must match the objective (Phase::full accepts either).
LossTerms loss_total(const model::ForwardBundle& b, const Labels& y, Objective objective);

}  // namespace sadsp::losses
