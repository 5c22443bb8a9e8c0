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

#include "sadsp/eval/inference.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "sadsp/binary_io.hpp"
#include "sadsp/errors.hpp"
#include "sadsp/trainer/trainer.hpp"

namespace sadsp::eval {

void GammaWeights::validate() const {
  if (!(g1 >= 0.0 && g2 >= 0.0 && g3 >= 0.0)) throw ContractError("gamma weights must be nonnegative");
  if (std::abs(g1 + g2 + g3 - 1.0) > 1e-9) throw ContractError("gamma weights must sum to 1 (got " + to_string() + ")");
}

GammaWeights GammaWeights::parse(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ContractError("cannot parse gamma component '" + cell + "'");
    }
  }
  if (values.size() != 3) throw ContractError("gamma needs three comma-separated values");
  GammaWeights g{values[0], values[1], values[2]};
  g.validate();
  return g;
}

std::string GammaWeights::to_string() const {
  std::ostringstream out;
  out.precision(17);
  out << g1 << ',' << g2 << ',' << g3;
  return out.str();
}

BranchMask BranchMask::from_disabled(const std::string& list) {
  BranchMask mask;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }), item.end());
    if (item.empty()) continue;
    if (item == "pf_s") {
      mask.pf_s = false;
    } else if (item == "pf_o") {
      mask.pf_o = false;
    } else if (item == "pc_s") {
      mask.pc_s = false;
    } else if (item == "pc_o") {
      mask.pc_o = false;
    } else {
      throw ContractError("unknown branch '" + item + "' (expected pf_s, pf_o, pc_s, pc_o)");
    }
  }
  return mask;
}

std::string BranchMask::disabled_list() const {
  std::vector<std::string> off;
  if (!pf_s) off.emplace_back("pf_s");
  if (!pf_o) off.emplace_back("pf_o");
  if (!pc_s) off.emplace_back("pc_s");
  if (!pc_o) off.emplace_back("pc_o");
  std::string out;
  for (std::size_t i = 0; i < off.size(); ++i) out += (i ? "," : "") + off[i];
  return out;
}

namespace {

std::vector<double> fuse_one(std::span<const double> p, std::span<const double> a, std::span<const double> pc,
                             const GammaWeights& g, bool use_attention, bool use_disentangled) {
  if (a.size() != p.size() || pc.size() != p.size()) throw ContractError("fuse: branch lengths differ");
  std::vector<double> out(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    double v = g.g1 * p[k];
    if (use_attention) v += g.g2 * a[k] * p[k];
    if (use_disentangled) v += g.g3 * pc[k];
    out[k] = v;
  }
  return out;
}

}  // namespace

FusedScores fuse(const RawPrediction& raw, const GammaWeights& gamma, const BranchMask& mask) {
  gamma.validate();
  return {fuse_one(raw.p_s, raw.a_s, raw.pc_s, gamma, mask.pf_s, mask.pc_s),
          fuse_one(raw.p_o, raw.a_o, raw.pc_o, gamma, mask.pf_o, mask.pc_o)};
}

RawPrediction raw_prediction(const model::ForwardBundle& b, std::size_t row) {
  using model::row_of;
  return {row_of(b.p_s.value(), row),     row_of(b.a_s.value(), row), row_of(b.pd_s_gen.value(), row),
          row_of(b.p_o.value(), row),     row_of(b.a_o.value(), row), row_of(b.pd_o_gen.value(), row)};
}

FusedScores fuse(const model::ForwardBundle& bundle, std::size_t row, const GammaWeights& gamma,
                 const BranchMask& mask) {
  return fuse(raw_prediction(bundle, row), gamma, mask);
}

std::vector<RawPrediction> predict_raw(const model::ModelParams& params, const data::Dataset& dataset,
                                       std::span<const std::size_t> indices) {
  if (params.dims().feature_dim != dataset.spec.feature_dim ||
      params.dims().num_states != dataset.spec.num_states || params.dims().num_objects != dataset.spec.num_objects) {
    throw DimensionError("checkpoint dimensions do not match the dataset");
  }
  constexpr std::size_t kChunk = 256;
  std::vector<RawPrediction> out;
  out.reserve(indices.size());
  for (std::size_t begin = 0; begin < indices.size(); begin += kChunk) {
    const auto chunk = indices.subspan(begin, std::min(kChunk, indices.size() - begin));
    nd::Graph graph;
    const auto bundle = model::forward(params, graph, trainer::feature_batch(dataset, chunk));
    for (std::size_t r = 0; r < chunk.size(); ++r) out.push_back(raw_prediction(bundle, r));
  }
  return out;
}

data::Pair predict_composition(std::span<const double> state, std::span<const double> object,
                               std::span<const data::Pair> pairs) {
  if (pairs.empty()) throw ContractError("predict_composition: empty pair list");
  data::Pair best = pairs[0];
  double best_score = state[best.state] * object[best.object];
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    const double score = state[pairs[i].state] * object[pairs[i].object];
    if (score > best_score) {
      best_score = score;
      best = pairs[i];
    }
  }
  return best;
}

ScoreTable build_score_table(const data::Dataset& dataset, std::span<const std::size_t> indices,
                             std::span<const RawPrediction> raw, const GammaWeights& gamma, const BranchMask& mask) {
  if (indices.size() != raw.size()) throw ContractError("build_score_table: one prediction per sample required");
  ScoreTable table;
  table.num_states = dataset.spec.num_states;
  table.num_objects = dataset.spec.num_objects;
  table.rows.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const data::Sample& s = dataset.samples[indices[i]];
    table.rows.push_back({s.state, s.object, s.split, fuse(raw[i], gamma, mask)});
  }
  return table;
}

void write_score_table(const ScoreTable& table, const std::filesystem::path& path) {
  io::ByteWriter out;
  out.bytes(std::string_view(kScoreMagic, 8));
  out.u32(static_cast<std::uint32_t>(table.num_states));
  out.u32(static_cast<std::uint32_t>(table.num_objects));
  out.u32(static_cast<std::uint32_t>(table.rows.size()));
  for (const auto& row : table.rows) {
    out.u16(static_cast<std::uint16_t>(row.state));
    out.u16(static_cast<std::uint16_t>(row.object));
    out.u8(static_cast<std::uint8_t>(row.split));
    for (double v : row.scores.state) out.f64(v);
    for (double v : row.scores.object) out.f64(v);
  }
  io::write_file(path, out.buffer());
}

ScoreTable read_score_table(const std::filesystem::path& path) {
  const std::vector<char> raw = io::read_file(path);
  io::ByteReader in(raw, path.string());
  if (in.bytes(8, "magic") != std::string_view(kScoreMagic, 8)) in.fail("bad magic, expected SADSPSC1");
  ScoreTable table;
  table.num_states = in.u32("num_states");
  table.num_objects = in.u32("num_objects");
  const std::uint32_t count = in.u32("num_rows");
  for (std::uint32_t n = 0; n < count; ++n) {
    ScoreTable::Row row;
    row.state = in.u16("state");
    row.object = in.u16("object");
    const std::uint8_t split = in.u8("split");
    if (split > 2 || row.state >= table.num_states || row.object >= table.num_objects) in.fail("bad row labels");
    row.split = static_cast<data::Split>(split);
    row.scores.state.resize(table.num_states);
    row.scores.object.resize(table.num_objects);
    for (double& v : row.scores.state) v = in.f64("state score");
    for (double& v : row.scores.object) v = in.f64("object score");
    table.rows.push_back(std::move(row));
  }
  if (in.remaining() != 0) in.fail("trailing bytes");
  return table;
}

PrimitiveAccuracy primitive_accuracy(const model::ModelParams& params, const data::Dataset& dataset,
                                     std::span<const std::size_t> indices) {
  if (indices.empty()) return {};
  const auto raw = predict_raw(params, dataset, indices);
  std::size_t state_hits = 0, object_hits = 0;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& s = dataset.samples[indices[i]];
    const auto argmax = [](const std::vector<double>& v) {
      return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    };
    state_hits += argmax(raw[i].p_s) == s.state;
    object_hits += argmax(raw[i].p_o) == s.object;
  }
  const double n = static_cast<double>(indices.size());
  return {static_cast<double>(state_hits) / n, static_cast<double>(object_hits) / n};
}

}  // namespace sadsp::eval
