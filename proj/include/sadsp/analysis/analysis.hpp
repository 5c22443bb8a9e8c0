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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sadsp/data/dataset.hpp"
#include "sadsp/model/model.hpp"

namespace sadsp::analysis {

// Row-major B x width values for one kind of per-sample output.
struct Rows {
  std::size_t width = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const { return {values.data() + i * width, width}; }
  std::size_t count() const { return width == 0 ? 0 : values.size() / width; }
};

// Inference-time intermediates for a list of samples, in order.
struct Embeddings {
  std::vector<std::size_t> indices;
  Rows z_s, z_o;    // branch features
  Rows zg_s, zg_o;  // generated (disentangled) features
  Rows a_s, a_o;    // attention over states / objects
  Rows pd_s, pd_o;  // disentangled classifiers on generated features
  Rows den_s;       // object probabilities read from generated state features
};
Embeddings embed(const model::ModelParams& params, const data::Dataset& dataset,
                 std::span<const std::size_t> indices);

// Samples selected for an analysis; nullopt means every sample.
std::vector<std::size_t> select(const data::Dataset& dataset, std::optional<data::Split> split);

// ---- attention accumulation ----

enum class Normalization { raw, state_conditioned_rows, object_conditioned_cols };

// |S| x |O|, row = state, column = object.
struct FeasibilityMatrix {
  std::size_t num_states = 0;
  std::size_t num_objects = 0;
  std::vector<double> m;
  Normalization normalization = Normalization::raw;
  std::vector<bool> row_touched, col_touched;

  double at(std::size_t s, std::size_t o) const { return m[s * num_objects + o]; }
  double& at(std::size_t s, std::size_t o) { return m[s * num_objects + o]; }
  std::vector<double> row(std::size_t s) const;
  std::vector<double> col(std::size_t o) const;
};

struct AttentionSample {
  std::size_t state = 0;
  std::size_t object = 0;
  std::vector<double> a_s;  // |S|
  std::vector<double> a_o;  // |O|
};

enum class AccumulationMode {
  // Per sample: row s <- softmax(row s + a_o), then column o <- softmax(column o + a_s).
  interleaved_softmax,
  // Row s += a_o, column o += a_s; no normalization (use the views below).
  raw_sum,
};

// Snapshot of the updated row and column right after each sample.
struct AccumulationStep {
  std::size_t state = 0;
  std::size_t object = 0;
  std::vector<double> row_after_row_update;
  std::vector<double> col_after_col_update;
};

FeasibilityMatrix accumulate_attention(std::size_t num_states, std::size_t num_objects,
                                       std::span<const AttentionSample> samples,
                                       AccumulationMode mode = AccumulationMode::interleaved_softmax,
                                       std::vector<AccumulationStep>* trace = nullptr);

// Runs the model over `split` (every sample if nullopt) in storage order.
FeasibilityMatrix accumulate_attention(const model::ModelParams& params, const data::Dataset& dataset,
                                       std::optional<data::Split> split = data::Split::train,
                                       AccumulationMode mode = AccumulationMode::interleaved_softmax,
                                       std::vector<AccumulationStep>* trace = nullptr);

// Views: softmax over every row (objects given a state) or every column.
FeasibilityMatrix normalized(const FeasibilityMatrix& m, Normalization how);
// (v - min) / (max - min); all zeros for a constant matrix.
std::vector<double> min_max(const FeasibilityMatrix& m);

void write_matrix_csv(const FeasibilityMatrix& m, const std::filesystem::path& path);
void write_heatmap_csv(const FeasibilityMatrix& m, const std::filesystem::path& path);

// ---- frequency of extreme attention ----

enum class Extreme { max, min };
enum class Conditioning { on_state, on_object };

// by_state[s][j]: samples with state s whose object attention a_o peaked
// (or bottomed) at object j. by_object[k][o]: likewise for a_s given object o.
// Ties go to the lowest index.
struct FrequencyTable {
  std::size_t num_states = 0;
  std::size_t num_objects = 0;
  Extreme extreme = Extreme::max;
  std::vector<std::uint64_t> by_state;   // |S| x |O|
  std::vector<std::uint64_t> by_object;  // |S| x |O|

  std::uint64_t count(Conditioning c, std::size_t s, std::size_t o) const {
    return (c == Conditioning::on_state ? by_state : by_object)[s * num_objects + o];
  }
};

FrequencyTable count_extremes(std::size_t num_states, std::size_t num_objects,
                              std::span<const AttentionSample> samples, Extreme extreme);
FrequencyTable count_extremes(const model::ModelParams& params, const data::Dataset& dataset,
                              std::optional<data::Split> split, Extreme extreme);

enum class Rank { top, bottom };
enum class Space { open_world, unseen_only };

struct RankedPair {
  data::Pair pair;
  std::uint64_t count = 0;
};
struct RankedList {
  std::vector<RankedPair> items;
  bool truncated = false;  // fewer than k candidates
};

// Pairs involving `primitive` (a state for on_state, an object for
// on_object) ordered by count; ties by open-world pair index.
RankedList topk_feasible(const FrequencyTable& table, Conditioning conditioning, std::size_t primitive,
                         std::size_t k, Rank rank, Space space, std::span<const data::Pair> seen_pairs);

void write_frequency_csv(const FrequencyTable& table, const std::filesystem::path& path);

// ---- prototype distances ----

struct PrototypeStats {
  std::vector<std::size_t> classes;            // classes with samples, ascending
  std::vector<std::size_t> omitted;            // classes without samples
  std::vector<std::vector<double>> prototypes; // aligned with `classes`
  std::vector<double> spread;                  // mean distance to prototype, per class
  double mean_spread = 0.0;
  double mean_inter_distance = 0.0;            // mean pairwise prototype distance
  double ratio() const { return mean_inter_distance > 0.0 ? mean_spread / mean_inter_distance : 0.0; }
};

PrototypeStats prototype_stats(const Rows& embeddings, std::span<const std::size_t> labels,
                               std::size_t num_classes);

struct PrototypeReport {
  PrototypeStats state_original, state_disentangled;
  PrototypeStats object_original, object_disentangled;
};

PrototypeReport prototype_report(const model::ModelParams& params, const data::Dataset& dataset,
                                 std::optional<data::Split> split = std::nullopt);
void write_prototype_csv(const PrototypeReport& report, const std::filesystem::path& path);
std::string prototype_summary(const PrototypeReport& report);

// ---- object information left in disentangled state features ----

struct ProbeConfig {
  int epochs = 200;
  double learning_rate = 1e-2;
  std::uint64_t seed = 0;
};

struct ProbeResult {
  double chance_objects = 0.0;   // 1 / |O|
  double chance_states = 0.0;    // 1 / |S|
  double probe_accuracy = 0.0;   // fresh linear probe z'_s -> object, on test samples
  double denoiser_accuracy = 0.0;  // the model's own f_s_den on test samples
  double disentangled_state_accuracy = 0.0;  // f_ds(z'_s) -> state, on test samples
};

// The probe is a softmax regression fit by full-batch Adam on the training
// split's generated state features.
ProbeResult object_probe(const model::ModelParams& params, const data::Dataset& dataset, const ProbeConfig& config = {});

}  // namespace sadsp::analysis
