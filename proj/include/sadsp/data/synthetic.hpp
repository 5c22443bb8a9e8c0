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
#include <cstdint>
#include <vector>

#include "sadsp/data/dataset.hpp"

namespace sadsp::data {

// Knobs for the planted-structure generator.
//
// Every state and object gets a low-rank latent factor. Feasibility of a pair
// is the top `feasible_fraction` of latent dot products, so primitives with
// similar latents share feasible partners. Prototypes are partly driven by the
// same latents, so similar primitives also look similar in feature space.
struct GeneratorConfig {
  std::size_t num_states = 8;
  std::size_t num_objects = 10;
  std::size_t feature_dim = 32;
  std::uint64_t seed = 0;

  std::size_t prototype_dim = 16;
  std::size_t latent_rank = 2;
  // Weight of the latent factor in each prototype, in [0, 1].
  double latent_coupling = 0.6;
  // Interaction strength kappa of the Hadamard term.
  double interaction = 2.0;
  // Standard deviation sigma of the additive feature noise.
  double noise = 0.5;
  double feasible_fraction = 0.6;
  // Seen compositions as a fraction of all |S|*|O| pairs.
  double seen_fraction = 0.4;
  std::size_t train_per_pair = 200;
  std::size_t test_per_pair = 40;
};

struct SyntheticWorld {
  std::size_t num_states = 0;
  std::size_t num_objects = 0;
  std::size_t prototype_dim = 0;
  // Row-major |S| x prototype_dim and |O| x prototype_dim.
  std::vector<double> state_prototypes;
  std::vector<double> object_prototypes;
  // feature_dim x (3 * prototype_dim), maps [p_s; p_o; kappa * p_s (.) p_o].
  std::vector<double> mixing;
  double interaction = 0.0;
  double noise = 0.0;
  // |S| x |O| in pair_index order.
  std::vector<char> feasibility_mask;

  bool feasible(const Pair& p) const { return feasibility_mask[p.state * num_objects + p.object] != 0; }

  // Noise-free feature of a composition.
  std::vector<double> clean_feature(const Pair& p) const;
};

struct SyntheticData {
  SyntheticWorld world;
  Dataset dataset;
};

// Deterministic in config (including seed). Train samples for every seen pair,
// test samples for every seen pair (test_seen) and every feasible unseen pair
// (test_unseen). Throws SpecError for unrealizable configs.
SyntheticData generate_synthetic(const GeneratorConfig& config);

}  // namespace sadsp::data
