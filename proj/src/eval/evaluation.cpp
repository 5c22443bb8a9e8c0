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

#include "sadsp/eval/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sadsp/binary_io.hpp"
#include "sadsp/errors.hpp"

namespace sadsp::eval {

double harmonic_mean(double seen, double unseen) {
  const double denom = seen + unseen;
  return denom > 0.0 ? 2.0 * seen * unseen / denom : 0.0;
}

double curve_auc(std::vector<std::pair<double, double>> points) {
  if (points.empty()) return 0.0;
  std::sort(points.begin(), points.end());
  std::vector<std::pair<double, double>> curve;
  for (const auto& p : points) {
    if (!curve.empty() && curve.back().first == p.first) {
      curve.back().second = std::max(curve.back().second, p.second);
    } else {
      curve.push_back(p);
    }
  }
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].first - curve[i - 1].first) * (curve[i].second + curve[i - 1].second) / 2.0;
  }
  return area;
}

SampleGap sample_gap(const ScoreTable& table, std::size_t row, const std::vector<bool>& seen_mask) {
  const std::size_t O = table.num_objects;
  const auto& state = table.rows[row].scores.state;
  const auto& object = table.rows[row].scores.object;
  SampleGap out;
  bool has_seen = false;
  double best_seen = 0.0, best_unseen = 0.0;
  for (std::size_t k = 0; k < table.num_states; ++k) {
    for (std::size_t j = 0; j < O; ++j) {
      const std::size_t idx = k * O + j;
      const double score = state[k] * object[j];
      if (seen_mask[idx]) {
        if (!has_seen || score > best_seen) {
          has_seen = true;
          best_seen = score;
          out.seen_index = idx;
        }
      } else if (!out.has_unseen || score > best_unseen) {
        out.has_unseen = true;
        best_unseen = score;
        out.unseen_index = idx;
      }
    }
  }
  if (!has_seen) throw ContractError("evaluation needs at least one seen pair");
  out.gap = out.has_unseen ? best_seen - best_unseen : 0.0;
  return out;
}

EvalSummary evaluate_scores(const ScoreTable& table, std::span<const data::Pair> seen_pairs,
                            const SweepConfig& sweep) {
  const std::size_t O = table.num_objects;
  std::vector<bool> seen_mask(table.num_states * O, false);
  for (const auto& p : seen_pairs) {
    if (p.state >= table.num_states || p.object >= O) throw ContractError("seen pair outside the pair space");
    seen_mask[p.state * O + p.object] = true;
  }

  std::size_t n_seen = 0, n_unseen = 0;
  std::vector<SampleGap> gaps;
  std::vector<std::size_t> truth;
  gaps.reserve(table.rows.size());
  double m = 0.0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.split == data::Split::test_seen) {
      ++n_seen;
    } else if (row.split == data::Split::test_unseen) {
      ++n_unseen;
    } else {
      throw ContractError("score table rows must come from the test splits");
    }
    gaps.push_back(sample_gap(table, r, seen_mask));
    truth.push_back(row.state * O + row.object);
    if (gaps.back().has_unseen) m = std::max(m, std::abs(gaps.back().gap));
  }
  if (n_seen == 0) throw ContractError("test_seen split is empty");
  if (n_unseen == 0) throw ContractError("test_unseen split is empty");
  if (!(m > 0.0)) m = 1.0;

  // Normalized thresholds t in [-1, 1]; bias = t * m.
  std::vector<double> thresholds;
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  if (sweep.points == 1) {
    thresholds.push_back(0.0);
  } else {
    const double denom = static_cast<double>(sweep.points - 1);
    for (std::size_t k = 0; k < sweep.points; ++k) {
      thresholds.push_back((2.0 * static_cast<double>(k) - denom) / denom);
    }
  }
  thresholds.push_back(std::numeric_limits<double>::infinity());

  std::vector<double> ratio(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) ratio[i] = gaps[i].gap / m;

  EvalSummary out;
  std::vector<std::pair<double, double>> curve;
  for (double t : thresholds) {
    std::size_t seen_hits = 0, unseen_hits = 0;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      const SampleGap& g = gaps[i];
      const bool pick_unseen =
          g.has_unseen && (ratio[i] < t || (ratio[i] == t && g.unseen_index < g.seen_index));
      const std::size_t predicted = pick_unseen ? g.unseen_index : g.seen_index;
      if (predicted != truth[i]) continue;
      if (table.rows[i].split == data::Split::test_seen) {
        ++seen_hits;
      } else {
        ++unseen_hits;
      }
    }
    SweepPoint p;
    p.bias = std::isinf(t) ? t : t * m;
    p.seen_acc = static_cast<double>(seen_hits) / static_cast<double>(n_seen);
    p.unseen_acc = static_cast<double>(unseen_hits) / static_cast<double>(n_unseen);
    out.best_S = std::max(out.best_S, p.seen_acc);
    out.best_U = std::max(out.best_U, p.unseen_acc);
    out.best_HM = std::max(out.best_HM, harmonic_mean(p.seen_acc, p.unseen_acc));
    curve.emplace_back(p.seen_acc, p.unseen_acc);
    out.sweep.push_back(p);
  }
  out.auc = curve_auc(std::move(curve));
  return out;
}

TestPredictions predict_test(const model::ModelParams& params, const data::Dataset& dataset) {
  TestPredictions out;
  out.indices = dataset.test_indices();
  out.raw = predict_raw(params, dataset, out.indices);
  return out;
}

EvalSummary evaluate(const TestPredictions& predictions, const data::Dataset& dataset, const GammaWeights& gamma,
                     const BranchMask& mask, const SweepConfig& sweep) {
  const ScoreTable table = build_score_table(dataset, predictions.indices, predictions.raw, gamma, mask);
  return evaluate_scores(table, dataset.spec.seen_pairs, sweep);
}

EvalSummary evaluate(const model::ModelParams& params, const data::Dataset& dataset, const GammaWeights& gamma,
                     const BranchMask& mask, const SweepConfig& sweep) {
  gamma.validate();
  return evaluate(predict_test(params, dataset), dataset, gamma, mask, sweep);
}

std::vector<AblationConfig> ablation_configs() {
  const auto off = [](const char* list) { return BranchMask::from_disabled(list); };
  return {
      {"module", "SP", off("pf_s,pf_o,pc_s,pc_o")},
      {"module", "SA-SP", off("pc_s,pc_o")},
      {"module", "KD-SP", off("pf_s,pf_o")},
      {"module", "SAD-SP", off("")},
      {"branch", "pf_s", off("pf_s")},
      {"branch", "pf_o", off("pf_o")},
      {"branch", "pc_s", off("pc_s")},
      {"branch", "pc_o", off("pc_o")},
      {"branch", "pf_s&pc_s", off("pf_s,pc_s")},
      {"branch", "pf_s&pc_o", off("pf_s,pc_o")},
      {"branch", "pf_o&pc_s", off("pf_o,pc_s")},
      {"branch", "pf_o&pc_o", off("pf_o,pc_o")},
  };
}

std::vector<AblationRow> run_ablation_suite(const model::ModelParams& params, const data::Dataset& dataset,
                                            const GammaWeights& gamma, const SweepConfig& sweep) {
  gamma.validate();
  const TestPredictions predictions = predict_test(params, dataset);
  std::vector<AblationRow> rows;
  for (const auto& config : ablation_configs()) {
    rows.push_back({config, evaluate(predictions, dataset, gamma, config.mask, sweep)});
  }
  return rows;
}

std::vector<double> GridConfig::grid_values(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw ContractError("grid needs step > 0 and hi >= lo");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12);
  }
  return out;
}

void GridConfig::validate() const {
  if (gamma2.empty() || gamma3.empty()) throw ContractError("gamma grid is empty");
  for (const auto* axis : {&gamma2, &gamma3}) {
    for (double v : *axis) {
      if (!(v >= 0.05 - 1e-12 && v <= 0.5 + 1e-12)) {
        throw ContractError("gamma grid values must lie in [0.05, 0.5], got " + format_number(v));
      }
    }
  }
}

bool GammaSweepResult::any_evaluated() const {
  return std::any_of(rows.begin(), rows.end(), [](const GammaRow& r) { return !r.skipped; });
}

GammaSweepResult gamma_sweep(const model::ModelParams& params, const data::Dataset& dataset, const GridConfig& grid,
                             const BranchMask& mask, const SweepConfig& sweep) {
  grid.validate();
  const TestPredictions predictions = predict_test(params, dataset);
  GammaSweepResult out;
  bool have_best = false;
  for (double g2 : grid.gamma2) {
    for (double g3 : grid.gamma3) {
      GammaRow row;
      row.gamma = {1.0 - g2 - g3, g2, g3};
      if (row.gamma.g1 < 0.0 && row.gamma.g1 > -1e-12) row.gamma.g1 = 0.0;
      if (row.gamma.g1 < 0.0) {
        row.skipped = true;
      } else {
        row.summary = evaluate(predictions, dataset, row.gamma, mask, sweep);
        if (!have_best || row.summary.auc > out.rows[out.best].summary.auc) {
          out.best = out.rows.size();
          have_best = true;
        }
      }
      out.rows.push_back(row);
    }
  }
  return out;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string metrics(const EvalSummary& s) {
  return format_number(100.0 * s.best_S) + ',' + format_number(100.0 * s.best_U) + ',' +
         format_number(100.0 * s.best_HM) + ',' + format_number(100.0 * s.auc);
}

}  // namespace

void write_summary_csv(const EvalSummary& summary, const std::filesystem::path& path) {
  io::write_text(path, "best_S,best_U,best_HM,AUC\n" + metrics(summary) + '\n');
}

void write_sweep_csv(const EvalSummary& summary, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "bias,seen_acc,unseen_acc,hm\n";
  for (const auto& p : summary.sweep) {
    out << format_number(p.bias) << ',' << format_number(100.0 * p.seen_acc) << ','
        << format_number(100.0 * p.unseen_acc) << ',' << format_number(100.0 * harmonic_mean(p.seen_acc, p.unseen_acc))
        << '\n';
  }
  io::write_text(path, out.str());
}

void write_curve_csv(const EvalSummary& summary, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "seen,unseen\n";
  for (const auto& p : summary.sweep) out << format_number(100.0 * p.seen_acc) << ',' << format_number(100.0 * p.unseen_acc) << '\n';
  io::write_text(path, out.str());
}

void write_ablation_csv(std::span<const AblationRow> rows, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "level,name,disabled,best_S,best_U,best_HM,AUC\n";
  for (const auto& row : rows) {
    out << row.config.level << ',' << row.config.name << ",\"" << row.config.mask.disabled_list() << "\","
        << metrics(row.summary) << '\n';
  }
  io::write_text(path, out.str());
}

void write_gamma_sweep_csv(const GammaSweepResult& result, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "gamma1,gamma2,gamma3,status,best_S,best_U,best_HM,AUC,best\n";
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& row = result.rows[i];
    out << format_number(row.gamma.g1) << ',' << format_number(row.gamma.g2) << ',' << format_number(row.gamma.g3)
        << ',';
    if (row.skipped) {
      out << "skipped_negative_gamma1,,,,,\n";
      continue;
    }
    out << "ok," << metrics(row.summary) << ',' << (i == result.best ? "*" : "") << '\n';
  }
  io::write_text(path, out.str());
}

}  // namespace sadsp::eval
