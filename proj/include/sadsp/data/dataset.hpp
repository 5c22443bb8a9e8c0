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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace sadsp::data {

enum class Split : std::uint8_t { train = 0, test_seen = 1, test_unseen = 2 };

std::string_view split_name(Split split);

// A (state, object) composition.
struct Pair {
  std::size_t state = 0;
  std::size_t object = 0;
  auto operator<=>(const Pair&) const = default;
};

struct DatasetSpec {
  std::size_t num_states = 0;
  std::size_t num_objects = 0;
  std::size_t feature_dim = 0;
  // Sorted, unique.
  std::vector<Pair> seen_pairs;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::uint64_t rng_seed = 0;

  std::size_t num_pairs() const { return num_states * num_objects; }
  // Row-major index of a pair in the open-world list.
  std::size_t pair_index(const Pair& p) const { return p.state * num_objects + p.object; }
  bool is_seen(const Pair& p) const;
  // Dense |S| x |O| seen indicator in pair_index order.
  std::vector<char> seen_mask() const;

  // Throws SpecError when dims are zero, seen pairs fall outside the grid,
  // or some state/object never occurs in a seen pair.
  void validate() const;
};

struct Sample {
  std::vector<float> features;
  std::size_t state = 0;
  std::size_t object = 0;
  Split split = Split::train;

  Pair pair() const { return {state, object}; }
  bool operator==(const Sample&) const = default;
};

struct Dataset {
  DatasetSpec spec;
  std::vector<Sample> samples;

  std::vector<std::size_t> indices_of(Split split) const;
  std::vector<std::size_t> test_indices() const;
  // Checks the sample/split invariants against spec; throws SpecError.
  void validate() const;
};

// Full Cartesian product S x O in state-major order.
std::vector<Pair> open_world_pairs(std::size_t num_states, std::size_t num_objects);
inline std::vector<Pair> open_world_pairs(const DatasetSpec& spec) {
  return open_world_pairs(spec.num_states, spec.num_objects);
}

// Batches of sample indices for one epoch: a seeded shuffle of [0, count)
// cut into batch_size chunks, the last one possibly shorter. Deterministic in
// (seed, epoch). Empty when count is zero.
std::vector<std::vector<std::size_t>> minibatches(std::size_t count, std::size_t batch_size, std::uint64_t seed,
                                                  std::uint64_t epoch);

}  // namespace sadsp::data
