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

#include "sadsp/data/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "sadsp/errors.hpp"
#include "sadsp/random.hpp"

namespace sadsp::data {

std::string_view split_name(Split split) {
  switch (split) {
    case Split::train:
      return "train";
    case Split::test_seen:
      return "test_seen";
    case Split::test_unseen:
      return "test_unseen";
  }
  return "unknown";
}

bool DatasetSpec::is_seen(const Pair& p) const {
  return std::binary_search(seen_pairs.begin(), seen_pairs.end(), p);
}

std::vector<char> DatasetSpec::seen_mask() const {
  std::vector<char> mask(num_pairs(), 0);
  for (const Pair& p : seen_pairs) mask[pair_index(p)] = 1;
  return mask;
}

void DatasetSpec::validate() const {
  if (num_states == 0 || num_objects == 0 || feature_dim == 0) {
    throw SpecError("dataset spec needs nonzero state, object and feature counts");
  }
  if (!std::is_sorted(seen_pairs.begin(), seen_pairs.end()) ||
      std::adjacent_find(seen_pairs.begin(), seen_pairs.end()) != seen_pairs.end()) {
    throw SpecError("seen pairs must be sorted and unique");
  }
  std::vector<char> state_seen(num_states, 0), object_seen(num_objects, 0);
  for (const Pair& p : seen_pairs) {
    if (p.state >= num_states || p.object >= num_objects) {
      throw SpecError("seen pair (" + std::to_string(p.state) + "," + std::to_string(p.object) +
                      ") outside the composition grid");
    }
    state_seen[p.state] = 1;
    object_seen[p.object] = 1;
  }
  for (std::size_t s = 0; s < num_states; ++s) {
    if (!state_seen[s]) throw SpecError("state " + std::to_string(s) + " occurs in no seen pair");
  }
  for (std::size_t o = 0; o < num_objects; ++o) {
    if (!object_seen[o]) throw SpecError("object " + std::to_string(o) + " occurs in no seen pair");
  }
}

std::vector<std::size_t> Dataset::indices_of(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].split == split) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> Dataset::test_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].split != Split::train) out.push_back(i);
  }
  return out;
}

void Dataset::validate() const {
  spec.validate();
  std::vector<char> trained_state(spec.num_states, 0), trained_object(spec.num_objects, 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    const std::string where = "sample " + std::to_string(i);
    if (s.features.size() != spec.feature_dim) throw SpecError(where + ": feature length mismatch");
    if (s.state >= spec.num_states || s.object >= spec.num_objects) throw SpecError(where + ": label out of range");
    const bool seen = spec.is_seen(s.pair());
    if (seen != (s.split != Split::test_unseen)) {
      throw SpecError(where + ": split " + std::string(split_name(s.split)) + " disagrees with seen-pair set");
    }
    if (s.split == Split::train) {
      trained_state[s.state] = 1;
      trained_object[s.object] = 1;
    }
  }
  const bool any_train = std::any_of(samples.begin(), samples.end(),
                                     [](const Sample& s) { return s.split == Split::train; });
  if (any_train) {
    if (std::find(trained_state.begin(), trained_state.end(), 0) != trained_state.end() ||
        std::find(trained_object.begin(), trained_object.end(), 0) != trained_object.end()) {
      throw SpecError("training split does not cover every state and object");
    }
  }
}

std::vector<Pair> open_world_pairs(std::size_t num_states, std::size_t num_objects) {
  std::vector<Pair> pairs;
  pairs.reserve(num_states * num_objects);
  for (std::size_t s = 0; s < num_states; ++s) {
    for (std::size_t o = 0; o < num_objects; ++o) pairs.push_back({s, o});
  }
  return pairs;
}

std::vector<std::vector<std::size_t>> minibatches(std::size_t count, std::size_t batch_size, std::uint64_t seed,
                                                  std::uint64_t epoch) {
  if (batch_size == 0) throw ContractError("batch_size must be at least 1");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng::derived(seed, epoch);
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t begin = 0; begin < count; begin += batch_size) {
    const std::size_t end = std::min(count, begin + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(begin),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

}  // namespace sadsp::data
