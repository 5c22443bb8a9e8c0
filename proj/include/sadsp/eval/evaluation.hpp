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
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sadsp/data/dataset.hpp"
#include "sadsp/eval/inference.hpp"
#include "sadsp/model/model.hpp"

namespace sadsp::eval {

struct SweepConfig {
  // Finite bias points in [-m, m]; -inf and +inf are always added.
  std::size_t points = 201;
};

struct SweepPoint {
  double bias = 0.0;
  double seen_acc = 0.0;
  double unseen_acc = 0.0;
};

struct EvalSummary {
  std::vector<SweepPoint> sweep;  // ascending bias
  double best_S = 0.0;
  double best_U = 0.0;
  double best_HM = 0.0;
  double auc = 0.0;
};

// 2SU/(S+U), 0 when both are 0.
double harmonic_mean(double seen, double unseen);

// Trapezoid area of unseen over seen. Points are sorted by seen; repeated
// seen values keep their largest unseen value.
double curve_auc(std::vector<std::pair<double, double>> seen_unseen);

// Per-sample decision data over the open-world pair list.
struct SampleGap {
  std::size_t seen_index = 0;    // best seen pair (open-world index)
  std::size_t unseen_index = 0;  // best unseen pair, valid if has_unseen
  bool has_unseen = false;
  double gap = 0.0;              // best seen score - best unseen score
};
SampleGap sample_gap(const ScoreTable& table, std::size_t row, const std::vector<bool>& seen_mask);

// Bias calibration sweep. A bias b is added to every unseen pair's score;
// biases are placed on a uniform grid over [-m, m] with m the largest
// |gap| in the table, so the sweep is invariant to rescaling all scores.
// Throws ContractError if either test split is empty.
EvalSummary evaluate_scores(const ScoreTable& table, std::span<const data::Pair> seen_pairs,
                            const SweepConfig& sweep = {});

EvalSummary evaluate(const model::ModelParams& params, const data::Dataset& dataset, const GammaWeights& gamma,
                     const BranchMask& mask, const SweepConfig& sweep = {});

// One forward pass over the test split, reused across configurations.
struct TestPredictions {
  std::vector<std::size_t> indices;
  std::vector<RawPrediction> raw;
};
TestPredictions predict_test(const model::ModelParams& params, const data::Dataset& dataset);
EvalSummary evaluate(const TestPredictions& predictions, const data::Dataset& dataset, const GammaWeights& gamma,
                     const BranchMask& mask, const SweepConfig& sweep = {});

struct AblationConfig {
  std::string level;  // "module" or "branch"
  std::string name;
  BranchMask mask;
};
// SP, SA-SP, KD-SP, SAD-SP, then the eight single and paired branch masks.
std::vector<AblationConfig> ablation_configs();

struct AblationRow {
  AblationConfig config;
  EvalSummary summary;
};
std::vector<AblationRow> run_ablation_suite(const model::ModelParams& params, const data::Dataset& dataset,
                                            const GammaWeights& gamma, const SweepConfig& sweep = {});

struct GridConfig {
  std::vector<double> gamma2 = grid_values(0.05, 0.5, 0.05);
  std::vector<double> gamma3 = grid_values(0.05, 0.5, 0.05);

  // lo, lo + step, ..., hi, each rounded to 12 decimals.
  static std::vector<double> grid_values(double lo, double hi, double step);
  // Throws ContractError for an empty grid or values outside [0.05, 0.5].
  void validate() const;
};

struct GammaRow {
  GammaWeights gamma;
  bool skipped = false;  // gamma1 would be negative
  EvalSummary summary;
};

struct GammaSweepResult {
  std::vector<GammaRow> rows;
  std::size_t best = 0;  // highest AUC among evaluated rows, first on ties
  bool any_evaluated() const;
};

GammaSweepResult gamma_sweep(const model::ModelParams& params, const data::Dataset& dataset, const GridConfig& grid,
                             const BranchMask& mask = {}, const SweepConfig& sweep = {});

// CSV reports; accuracies are written in percent.
void write_summary_csv(const EvalSummary& summary, const std::filesystem::path& path);
void write_sweep_csv(const EvalSummary& summary, const std::filesystem::path& path);
// Two columns: seen, unseen.
void write_curve_csv(const EvalSummary& summary, const std::filesystem::path& path);
void write_ablation_csv(std::span<const AblationRow> rows, const std::filesystem::path& path);
void write_gamma_sweep_csv(const GammaSweepResult& result, const std::filesystem::path& path);

// Full-precision decimal text used by every CSV writer.
std::string format_number(double v);

}  // namespace sadsp::eval
