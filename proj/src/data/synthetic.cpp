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

#include "sadsp/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sadsp/errors.hpp"
#include "sadsp/random.hpp"

namespace sadsp::data {
namespace {

std::vector<double> normal_matrix(Rng& rng, std::size_t rows, std::size_t cols, double stddev) {
  std::vector<double> m(rows * cols);
  for (double& v : m) v = rng.normal(0.0, stddev);
  return m;
}

void check_config(const GeneratorConfig& c) {
  if (c.num_states < 2 || c.num_objects < 2) throw SpecError("need at least 2 states and 2 objects");
  if (c.feature_dim == 0 || c.prototype_dim == 0 || c.latent_rank == 0) {
    throw SpecError("feature, prototype and latent dimensions must be positive");
  }
  if (!(c.interaction >= 0.0) || !(c.noise >= 0.0)) throw SpecError("interaction and noise must be >= 0");
  if (!(c.latent_coupling >= 0.0 && c.latent_coupling <= 1.0)) throw SpecError("latent_coupling must lie in [0,1]");
  if (!(c.feasible_fraction > 0.0 && c.feasible_fraction <= 1.0)) throw SpecError("feasible_fraction must lie in (0,1]");
  if (!(c.seen_fraction > 0.0 && c.seen_fraction < 1.0)) throw SpecError("seen_fraction must lie in (0,1)");
  if (c.train_per_pair == 0) throw SpecError("train_per_pair must be positive");
}

// Top-fraction of latent affinities, then topped up so every row and column
// has at least two feasible entries.
std::vector<char> plant_feasibility(const GeneratorConfig& c, const std::vector<double>& u,
                                    const std::vector<double>& v) {
  const std::size_t S = c.num_states, O = c.num_objects, r = c.latent_rank;
  std::vector<double> affinity(S * O);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t o = 0; o < O; ++o) {
      double dot = 0.0;
      for (std::size_t k = 0; k < r; ++k) dot += u[s * r + k] * v[o * r + k];
      affinity[s * O + o] = dot;
    }
  }
  std::vector<std::size_t> order(S * O);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return affinity[a] > affinity[b]; });
  const auto keep = static_cast<std::size_t>(std::lround(c.feasible_fraction * static_cast<double>(S * O)));
  std::vector<char> mask(S * O, 0);
  for (std::size_t i = 0; i < std::min(keep, order.size()); ++i) mask[order[i]] = 1;

  auto top_up = [&](auto index_of, std::size_t lines, std::size_t length) {
    for (std::size_t line = 0; line < lines; ++line) {
      std::vector<std::size_t> cells(length);
      for (std::size_t k = 0; k < length; ++k) cells[k] = index_of(line, k);
      std::stable_sort(cells.begin(), cells.end(),
                       [&](std::size_t a, std::size_t b) { return affinity[a] > affinity[b]; });
      std::size_t have = 0;
      for (std::size_t cell : cells) have += mask[cell];
      for (std::size_t cell : cells) {
        if (have >= 2) break;
        if (!mask[cell]) {
          mask[cell] = 1;
          ++have;
        }
      }
    }
  };
  top_up([O](std::size_t s, std::size_t o) { return s * O + o; }, S, O);
  top_up([O](std::size_t o, std::size_t s) { return s * O + o; }, O, S);
  return mask;
}

std::vector<Pair> choose_seen(const GeneratorConfig& c, const std::vector<char>& mask, Rng& rng) {
  const std::size_t S = c.num_states, O = c.num_objects;
  std::vector<Pair> feasible;
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t o = 0; o < O; ++o) {
      if (mask[s * O + o]) feasible.push_back({s, o});
    }
  }
  rng.shuffle(feasible);
  const auto target = static_cast<std::size_t>(std::lround(c.seen_fraction * static_cast<double>(S * O)));
  if (target + 1 > feasible.size()) {
    throw SpecError("seen_fraction leaves no feasible unseen pair (" + std::to_string(target) + " seen of " +
                    std::to_string(feasible.size()) + " feasible)");
  }

  std::vector<char> chosen(feasible.size(), 0);
  std::vector<char> state_covered(S, 0), object_covered(O, 0);
  std::size_t count = 0;
  auto take = [&](std::size_t i) {
    chosen[i] = 1;
    state_covered[feasible[i].state] = 1;
    object_covered[feasible[i].object] = 1;
    ++count;
  };
  // Cover every state, preferring pairs that also cover a new object.
  for (std::size_t s = 0; s < S; ++s) {
    if (state_covered[s]) continue;
    std::size_t pick = feasible.size();
    for (std::size_t i = 0; i < feasible.size(); ++i) {
      if (feasible[i].state != s) continue;
      if (pick == feasible.size()) pick = i;
      if (!object_covered[feasible[i].object]) {
        pick = i;
        break;
      }
    }
    take(pick);
  }
  for (std::size_t o = 0; o < O; ++o) {
    if (object_covered[o]) continue;
    for (std::size_t i = 0; i < feasible.size(); ++i) {
      if (feasible[i].object == o) {
        take(i);
        break;
      }
    }
  }
  if (count > target) {
    throw SpecError("covering every primitive needs " + std::to_string(count) + " seen pairs but only " +
                    std::to_string(target) + " are allowed");
  }
  for (std::size_t i = 0; i < feasible.size() && count < target; ++i) {
    if (!chosen[i]) take(i);
  }
  std::vector<Pair> seen;
  for (std::size_t i = 0; i < feasible.size(); ++i) {
    if (chosen[i]) seen.push_back(feasible[i]);
  }
  std::sort(seen.begin(), seen.end());
  return seen;
}

}  // namespace

std::vector<double> SyntheticWorld::clean_feature(const Pair& p) const {
  const std::size_t dp = prototype_dim;
  const std::size_t width = 3 * dp;
  const std::size_t dim = mixing.size() / width;
  std::vector<double> concat(width);
  for (std::size_t k = 0; k < dp; ++k) {
    const double ps = state_prototypes[p.state * dp + k];
    const double po = object_prototypes[p.object * dp + k];
    concat[k] = ps;
    concat[dp + k] = po;
    concat[2 * dp + k] = interaction * ps * po;
  }
  std::vector<double> out(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < width; ++k) acc += mixing[i * width + k] * concat[k];
    out[i] = acc;
  }
  return out;
}

SyntheticData generate_synthetic(const GeneratorConfig& c) {
  check_config(c);
  const std::size_t S = c.num_states, O = c.num_objects, dp = c.prototype_dim, r = c.latent_rank;
  Rng rng(c.seed);

  const std::vector<double> state_latent = normal_matrix(rng, S, r, 1.0);
  const std::vector<double> object_latent = normal_matrix(rng, O, r, 1.0);

  SyntheticWorld world;
  world.num_states = S;
  world.num_objects = O;
  world.prototype_dim = dp;
  world.interaction = c.interaction;
  world.noise = c.noise;
  world.feasibility_mask = plant_feasibility(c, state_latent, object_latent);

  const double coupled = c.latent_coupling / std::sqrt(static_cast<double>(r));
  const double free = std::sqrt(1.0 - c.latent_coupling * c.latent_coupling);
  auto prototypes = [&](const std::vector<double>& latent, std::size_t count) {
    const std::vector<double> lift = normal_matrix(rng, dp, r, 1.0);
    std::vector<double> proto(count * dp);
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t k = 0; k < dp; ++k) {
        double drive = 0.0;
        for (std::size_t j = 0; j < r; ++j) drive += lift[k * r + j] * latent[i * r + j];
        proto[i * dp + k] = coupled * drive + free * rng.normal();
      }
    }
    return proto;
  };
  world.state_prototypes = prototypes(state_latent, S);
  world.object_prototypes = prototypes(object_latent, O);
  world.mixing = normal_matrix(rng, c.feature_dim, 3 * dp, 1.0 / std::sqrt(static_cast<double>(3 * dp)));

  Dataset dataset;
  DatasetSpec& spec = dataset.spec;
  spec.num_states = S;
  spec.num_objects = O;
  spec.feature_dim = c.feature_dim;
  spec.rng_seed = c.seed;
  spec.seen_pairs = choose_seen(c, world.feasibility_mask, rng);

  auto emit = [&](const Pair& p, Split split, std::size_t count) {
    const std::vector<double> clean = world.clean_feature(p);
    for (std::size_t n = 0; n < count; ++n) {
      Sample sample;
      sample.state = p.state;
      sample.object = p.object;
      sample.split = split;
      sample.features.resize(c.feature_dim);
      for (std::size_t i = 0; i < c.feature_dim; ++i) {
        const double noise = c.noise > 0.0 ? c.noise * rng.normal() : 0.0;
        sample.features[i] = static_cast<float>(clean[i] + noise);
      }
      dataset.samples.push_back(std::move(sample));
    }
  };
  for (const Pair& p : spec.seen_pairs) emit(p, Split::train, c.train_per_pair);
  for (const Pair& p : spec.seen_pairs) emit(p, Split::test_seen, c.test_per_pair);
  for (const Pair& p : open_world_pairs(S, O)) {
    if (world.feasible(p) && !spec.is_seen(p)) emit(p, Split::test_unseen, c.test_per_pair);
  }
  spec.train_size = spec.seen_pairs.size() * c.train_per_pair;
  spec.test_size = dataset.samples.size() - spec.train_size;
  dataset.validate();
  return SyntheticData{std::move(world), std::move(dataset)};
}

}  // namespace sadsp::data
