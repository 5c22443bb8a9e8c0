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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sadsp/data/dataset.hpp"
#include "sadsp/model/model.hpp"

namespace sadsp::eval {

// Inference fusion coefficients; must be nonnegative and sum to 1.
struct GammaWeights {
  double g1 = 0.7;
  double g2 = 0.25;
  double g3 = 0.05;

  // Throws ContractError when a weight is negative or the sum is off by > 1e-9.
  void validate() const;
  // "0.7,0.25,0.05"
  static GammaWeights parse(const std::string& text);
  std::string to_string() const;
};

// Which revision branches contribute at inference.
struct BranchMask {
  bool pf_s = true;  // a_s * p_s, object-conditioned feasibility of states
  bool pf_o = true;  // a_o * p_o
  bool pc_s = true;  // disentangled state classifier
  bool pc_o = true;  // disentangled object classifier

  // Comma list of pf_s, pf_o, pc_s, pc_o naming the branches to switch off.
  static BranchMask from_disabled(const std::string& list);
  std::string disabled_list() const;
  bool operator==(const BranchMask&) const = default;
};

// Per-sample model outputs needed for fusion.
struct RawPrediction {
  std::vector<double> p_s, a_s, pc_s;
  std::vector<double> p_o, a_o, pc_o;
};

struct FusedScores {
  std::vector<double> state;
  std::vector<double> object;
};

// p'[k] = g1 p[k] + g2 a[k] p[k] [branch on] + g3 pc[k] [branch on].
// A disabled branch contributes exactly zero; gamma is not renormalized.
FusedScores fuse(const RawPrediction& raw, const GammaWeights& gamma, const BranchMask& mask);
FusedScores fuse(const model::ForwardBundle& bundle, std::size_t row, const GammaWeights& gamma,
                 const BranchMask& mask);

RawPrediction raw_prediction(const model::ForwardBundle& bundle, std::size_t row);

// Runs the model once over the given samples (in order), in chunks.
std::vector<RawPrediction> predict_raw(const model::ModelParams& params, const data::Dataset& dataset,
                                       std::span<const std::size_t> indices);

// argmax over `pairs` of state[k] * object[j]; ties go to the earliest pair
// in the list. Throws ContractError on an empty list.
data::Pair predict_composition(std::span<const double> state, std::span<const double> object,
                               std::span<const data::Pair> pairs);

// Fused primitive scores for every test sample.
struct ScoreTable {
  std::size_t num_states = 0;
  std::size_t num_objects = 0;
  struct Row {
    std::size_t state = 0;
    std::size_t object = 0;
    data::Split split = data::Split::test_seen;
    FusedScores scores;
  };
  std::vector<Row> rows;

  double composition(std::size_t row, const data::Pair& p) const {
    return rows[row].scores.state[p.state] * rows[row].scores.object[p.object];
  }
};

ScoreTable build_score_table(const data::Dataset& dataset, std::span<const std::size_t> indices,
                             std::span<const RawPrediction> raw, const GammaWeights& gamma, const BranchMask& mask);

// Binary dump: "SADSPSC1" | u32 |S| | u32 |O| | u32 n
//   n x ( u16 state | u16 object | u8 split | |S| x f64 | |O| x f64 )
inline constexpr char kScoreMagic[] = "SADSPSC1";
void write_score_table(const ScoreTable& table, const std::filesystem::path& path);
ScoreTable read_score_table(const std::filesystem::path& path);

struct PrimitiveAccuracy {
  double state = 0.0;
  double object = 0.0;
};
// Top-1 accuracy of the plain p_s / p_o classifiers on the given samples.
PrimitiveAccuracy primitive_accuracy(const model::ModelParams& params, const data::Dataset& dataset,
                                     std::span<const std::size_t> indices);

}  // namespace sadsp::eval
