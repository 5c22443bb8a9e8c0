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

#include "sadsp/analysis/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sadsp/binary_io.hpp"
#include "sadsp/errors.hpp"
#include "sadsp/ndkit/adam.hpp"
#include "sadsp/ndkit/ops.hpp"
#include "sadsp/trainer/trainer.hpp"

namespace sadsp::analysis {

namespace {

void append(Rows& rows, const nd::Tensor& t) {
  rows.width = t.cols();
  rows.values.insert(rows.values.end(), t.values().begin(), t.values().end());
}

void check_dims(const model::ModelParams& params, const data::DatasetSpec& spec) {
  const auto& d = params.dims();
  if (d.num_states != spec.num_states || d.num_objects != spec.num_objects || d.feature_dim != spec.feature_dim) {
    throw DimensionError("checkpoint dimensions do not match the dataset");
  }
}

std::vector<double> softmax_of(std::vector<double> v) {
  if (v.empty()) return v;
  const double hi = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double& x : v) {
    x = std::exp(x - hi);
    total += x;
  }
  for (double& x : v) x /= total;
  return v;
}

std::string num(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::vector<AttentionSample> attention_samples(const model::ModelParams& params, const data::Dataset& dataset,
                                               std::optional<data::Split> split) {
  check_dims(params, dataset.spec);
  const auto indices = select(dataset, split);
  const Embeddings e = embed(params, dataset, indices);
  std::vector<AttentionSample> out;
  out.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& s = dataset.samples[indices[i]];
    const auto a_s = e.a_s.row(i);
    const auto a_o = e.a_o.row(i);
    out.push_back({s.state, s.object, {a_s.begin(), a_s.end()}, {a_o.begin(), a_o.end()}});
  }
  return out;
}

}  // namespace

std::vector<std::size_t> select(const data::Dataset& dataset, std::optional<data::Split> split) {
  if (split) return dataset.indices_of(*split);
  std::vector<std::size_t> all(dataset.samples.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

Embeddings embed(const model::ModelParams& params, const data::Dataset& dataset,
                 std::span<const std::size_t> indices) {
  check_dims(params, dataset.spec);
  constexpr std::size_t kChunk = 256;
  Embeddings e;
  e.indices.assign(indices.begin(), indices.end());
  for (std::size_t begin = 0; begin < indices.size(); begin += kChunk) {
    const auto chunk = indices.subspan(begin, std::min(kChunk, indices.size() - begin));
    nd::Graph graph;
    const auto b = model::forward(params, graph, trainer::feature_batch(dataset, chunk));
    append(e.z_s, b.z_s.value());
    append(e.z_o, b.z_o.value());
    append(e.zg_s, b.zg_s.value());
    append(e.zg_o, b.zg_o.value());
    append(e.a_s, b.a_s.value());
    append(e.a_o, b.a_o.value());
    append(e.pd_s, b.pd_s_gen.value());
    append(e.pd_o, b.pd_o_gen.value());
    append(e.den_s, b.den_s_gen.value());
  }
  return e;
}

std::vector<double> FeasibilityMatrix::row(std::size_t s) const {
  return {m.begin() + static_cast<std::ptrdiff_t>(s * num_objects),
          m.begin() + static_cast<std::ptrdiff_t>((s + 1) * num_objects)};
}

std::vector<double> FeasibilityMatrix::col(std::size_t o) const {
  std::vector<double> out(num_states);
  for (std::size_t s = 0; s < num_states; ++s) out[s] = at(s, o);
  return out;
}

FeasibilityMatrix accumulate_attention(std::size_t num_states, std::size_t num_objects,
                                       std::span<const AttentionSample> samples, AccumulationMode mode,
                                       std::vector<AccumulationStep>* trace) {
  FeasibilityMatrix M;
  M.num_states = num_states;
  M.num_objects = num_objects;
  M.m.assign(num_states * num_objects, 0.0);
  M.row_touched.assign(num_states, false);
  M.col_touched.assign(num_objects, false);
  for (const AttentionSample& x : samples) {
    if (x.state >= num_states || x.object >= num_objects || x.a_s.size() != num_states ||
        x.a_o.size() != num_objects) {
      throw DimensionError("attention sample does not fit a " + std::to_string(num_states) + "x" +
                           std::to_string(num_objects) + " matrix");
    }
    std::vector<double> row = M.row(x.state);
    for (std::size_t o = 0; o < num_objects; ++o) row[o] += x.a_o[o];
    if (mode == AccumulationMode::interleaved_softmax) row = softmax_of(std::move(row));
    for (std::size_t o = 0; o < num_objects; ++o) M.at(x.state, o) = row[o];

    std::vector<double> col = M.col(x.object);
    for (std::size_t s = 0; s < num_states; ++s) col[s] += x.a_s[s];
    if (mode == AccumulationMode::interleaved_softmax) col = softmax_of(std::move(col));
    for (std::size_t s = 0; s < num_states; ++s) M.at(s, x.object) = col[s];

    M.row_touched[x.state] = true;
    M.col_touched[x.object] = true;
    if (trace) trace->push_back({x.state, x.object, std::move(row), std::move(col)});
  }
  return M;
}

FeasibilityMatrix accumulate_attention(const model::ModelParams& params, const data::Dataset& dataset,
                                       std::optional<data::Split> split, AccumulationMode mode,
                                       std::vector<AccumulationStep>* trace) {
  const auto samples = attention_samples(params, dataset, split);
  return accumulate_attention(dataset.spec.num_states, dataset.spec.num_objects, samples, mode, trace);
}

FeasibilityMatrix normalized(const FeasibilityMatrix& M, Normalization how) {
  FeasibilityMatrix out = M;
  out.normalization = how;
  if (how == Normalization::state_conditioned_rows) {
    for (std::size_t s = 0; s < M.num_states; ++s) {
      const auto row = softmax_of(M.row(s));
      for (std::size_t o = 0; o < M.num_objects; ++o) out.at(s, o) = row[o];
    }
  } else if (how == Normalization::object_conditioned_cols) {
    for (std::size_t o = 0; o < M.num_objects; ++o) {
      const auto col = softmax_of(M.col(o));
      for (std::size_t s = 0; s < M.num_states; ++s) out.at(s, o) = col[s];
    }
  }
  return out;
}

std::vector<double> min_max(const FeasibilityMatrix& M) {
  std::vector<double> out(M.m.size(), 0.0);
  if (M.m.empty()) return out;
  const auto [lo, hi] = std::minmax_element(M.m.begin(), M.m.end());
  const double range = *hi - *lo;
  if (range <= 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (M.m[i] - *lo) / range;
  return out;
}

namespace {

std::string grid_csv(std::size_t S, std::size_t O, const std::vector<double>& values) {
  std::ostringstream out;
  out << "state";
  for (std::size_t o = 0; o < O; ++o) out << ",o" << o;
  out << '\n';
  for (std::size_t s = 0; s < S; ++s) {
    out << 's' << s;
    for (std::size_t o = 0; o < O; ++o) out << ',' << num(values[s * O + o]);
    out << '\n';
  }
  return out.str();
}

}  // namespace

void write_matrix_csv(const FeasibilityMatrix& M, const std::filesystem::path& path) {
  io::write_text(path, grid_csv(M.num_states, M.num_objects, M.m));
}

void write_heatmap_csv(const FeasibilityMatrix& M, const std::filesystem::path& path) {
  io::write_text(path, grid_csv(M.num_states, M.num_objects, min_max(M)));
}

FrequencyTable count_extremes(std::size_t num_states, std::size_t num_objects,
                              std::span<const AttentionSample> samples, Extreme extreme) {
  FrequencyTable t;
  t.num_states = num_states;
  t.num_objects = num_objects;
  t.extreme = extreme;
  t.by_state.assign(num_states * num_objects, 0);
  t.by_object.assign(num_states * num_objects, 0);
  const auto pick = [extreme](const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (extreme == Extreme::max ? v[i] > v[best] : v[i] < v[best]) best = i;
    }
    return best;
  };
  for (const AttentionSample& x : samples) {
    if (x.state >= num_states || x.object >= num_objects || x.a_s.size() != num_states ||
        x.a_o.size() != num_objects) {
      throw DimensionError("attention sample does not fit the frequency table");
    }
    ++t.by_state[x.state * num_objects + pick(x.a_o)];
    ++t.by_object[pick(x.a_s) * num_objects + x.object];
  }
  return t;
}

FrequencyTable count_extremes(const model::ModelParams& params, const data::Dataset& dataset,
                              std::optional<data::Split> split, Extreme extreme) {
  const auto samples = attention_samples(params, dataset, split);
  return count_extremes(dataset.spec.num_states, dataset.spec.num_objects, samples, extreme);
}

RankedList topk_feasible(const FrequencyTable& table, Conditioning conditioning, std::size_t primitive,
                         std::size_t k, Rank rank, Space space, std::span<const data::Pair> seen_pairs) {
  if (k == 0) throw ContractError("k must be >= 1");
  const std::size_t S = table.num_states, O = table.num_objects;
  const bool on_state = conditioning == Conditioning::on_state;
  if (primitive >= (on_state ? S : O)) throw ContractError("primitive index out of range");

  std::vector<RankedPair> candidates;
  const std::size_t n = on_state ? O : S;
  for (std::size_t i = 0; i < n; ++i) {
    const data::Pair p = on_state ? data::Pair{primitive, i} : data::Pair{i, primitive};
    if (space == Space::unseen_only && std::find(seen_pairs.begin(), seen_pairs.end(), p) != seen_pairs.end()) {
      continue;
    }
    candidates.push_back({p, table.count(conditioning, p.state, p.object)});
  }
  // Candidates are generated in pair-index order, so a stable sort keeps ties by index.
  std::stable_sort(candidates.begin(), candidates.end(), [rank](const RankedPair& a, const RankedPair& b) {
    return rank == Rank::top ? a.count > b.count : a.count < b.count;
  });
  RankedList out;
  out.truncated = candidates.size() < k;
  candidates.resize(std::min(k, candidates.size()));
  out.items = std::move(candidates);
  return out;
}

void write_frequency_csv(const FrequencyTable& t, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "state,object,extreme,count_given_state,count_given_object\n";
  for (std::size_t s = 0; s < t.num_states; ++s) {
    for (std::size_t o = 0; o < t.num_objects; ++o) {
      out << s << ',' << o << ',' << (t.extreme == Extreme::max ? "max" : "min") << ','
          << t.by_state[s * t.num_objects + o] << ',' << t.by_object[s * t.num_objects + o] << '\n';
    }
  }
  io::write_text(path, out.str());
}

PrototypeStats prototype_stats(const Rows& emb, std::span<const std::size_t> labels, std::size_t num_classes) {
  if (emb.count() != labels.size()) throw ContractError("prototype_stats: one label per embedding required");
  const std::size_t w = emb.width;
  std::vector<std::vector<double>> sums(num_classes, std::vector<double>(w, 0.0));
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) throw ContractError("prototype_stats: label out of range");
    const auto x = emb.row(i);
    for (std::size_t c = 0; c < w; ++c) sums[labels[i]][c] += x[c];
    ++counts[labels[i]];
  }

  PrototypeStats out;
  std::vector<std::size_t> slot(num_classes, 0);
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (counts[k] == 0) {
      out.omitted.push_back(k);
      continue;
    }
    slot[k] = out.classes.size();
    out.classes.push_back(k);
    for (double& v : sums[k]) v /= static_cast<double>(counts[k]);
    out.prototypes.push_back(std::move(sums[k]));
  }
  const auto dist = [w](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t c = 0; c < w; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
    return std::sqrt(s);
  };
  out.spread.assign(out.classes.size(), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t k = slot[labels[i]];
    out.spread[k] += dist(emb.row(i), out.prototypes[k]);
  }
  for (std::size_t k = 0; k < out.classes.size(); ++k) {
    out.spread[k] /= static_cast<double>(counts[out.classes[k]]);
    out.mean_spread += out.spread[k];
  }
  if (!out.classes.empty()) out.mean_spread /= static_cast<double>(out.classes.size());

  std::size_t n_pairs = 0;
  for (std::size_t a = 0; a < out.classes.size(); ++a) {
    for (std::size_t b = a + 1; b < out.classes.size(); ++b) {
      out.mean_inter_distance += dist(out.prototypes[a], out.prototypes[b]);
      ++n_pairs;
    }
  }
  if (n_pairs > 0) out.mean_inter_distance /= static_cast<double>(n_pairs);
  return out;
}

PrototypeReport prototype_report(const model::ModelParams& params, const data::Dataset& dataset,
                                 std::optional<data::Split> split) {
  const auto indices = split ? dataset.indices_of(*split) : dataset.test_indices();
  const Embeddings e = embed(params, dataset, indices);
  std::vector<std::size_t> states, objects;
  for (std::size_t i : indices) {
    states.push_back(dataset.samples[i].state);
    objects.push_back(dataset.samples[i].object);
  }
  const std::size_t S = dataset.spec.num_states, O = dataset.spec.num_objects;
  return {prototype_stats(e.z_s, states, S), prototype_stats(e.zg_s, states, S),
          prototype_stats(e.z_o, objects, O), prototype_stats(e.zg_o, objects, O)};
}

void write_prototype_csv(const PrototypeReport& r, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "primitive,features,classes,omitted,mean_spread,mean_inter_distance,ratio\n";
  const auto line = [&out](const char* primitive, const char* features, const PrototypeStats& s) {
    out << primitive << ',' << features << ',' << s.classes.size() << ',' << s.omitted.size() << ','
        << num(s.mean_spread) << ',' << num(s.mean_inter_distance) << ',' << num(s.ratio()) << '\n';
  };
  line("state", "original", r.state_original);
  line("state", "disentangled", r.state_disentangled);
  line("object", "original", r.object_original);
  line("object", "disentangled", r.object_disentangled);
  io::write_text(path, out.str());
}

std::string prototype_summary(const PrototypeReport& r) {
  std::ostringstream out;
  out.precision(4);
  out << std::fixed;
  const auto block = [&out](const char* name, const PrototypeStats& before, const PrototypeStats& after) {
    out << name << " prototypes (" << before.classes.size() << " classes";
    if (!before.omitted.empty()) out << ", " << before.omitted.size() << " without samples omitted";
    out << ")\n";
    out << "  original:     spread " << before.mean_spread << "  inter " << before.mean_inter_distance << "  ratio "
        << before.ratio() << '\n';
    out << "  disentangled: spread " << after.mean_spread << "  inter " << after.mean_inter_distance << "  ratio "
        << after.ratio() << '\n';
  };
  block("state", r.state_original, r.state_disentangled);
  block("object", r.object_original, r.object_disentangled);
  return out.str();
}

ProbeResult object_probe(const model::ModelParams& params, const data::Dataset& dataset, const ProbeConfig& config) {
  const std::size_t S = dataset.spec.num_states, O = dataset.spec.num_objects;
  const auto train_idx = dataset.indices_of(data::Split::train);
  const auto test_idx = dataset.test_indices();
  if (train_idx.empty() || test_idx.empty()) throw ContractError("probe needs train and test samples");
  const Embeddings train = embed(params, dataset, train_idx);
  const Embeddings test = embed(params, dataset, test_idx);
  const std::size_t h = train.zg_s.width;

  // Standardize with training statistics so the probe's step size is scale free.
  std::vector<double> mu(h, 0.0), sd(h, 0.0);
  const std::size_t n = train_idx.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < h; ++c) mu[c] += train.zg_s.row(i)[c];
  }
  for (double& v : mu) v /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < h; ++c) sd[c] += std::pow(train.zg_s.row(i)[c] - mu[c], 2);
  }
  for (double& v : sd) v = std::sqrt(v / static_cast<double>(n)) + 1e-8;
  const auto standardized = [&](const Rows& rows) {
    nd::Tensor x = nd::Tensor::zeros({rows.count(), h});
    for (std::size_t i = 0; i < rows.count(); ++i) {
      for (std::size_t c = 0; c < h; ++c) x.at(i, c) = (rows.row(i)[c] - mu[c]) / sd[c];
    }
    return x;
  };
  const nd::Tensor x_train = standardized(train.zg_s);
  const nd::Tensor x_test = standardized(test.zg_s);
  std::vector<std::size_t> y_train;
  for (std::size_t i : train_idx) y_train.push_back(dataset.samples[i].object);

  nd::Tensor w = nd::Tensor::zeros({h, O}, true);
  nd::Tensor b = nd::Tensor::zeros({O}, true);
  nd::Adam opt({&w, &b}, nd::AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8, 0.0});
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    opt.zero_grad();
    nd::Graph g;
    const auto probs = nd::softmax(nd::add_bias(nd::matmul(g.constant(x_train), g.leaf(w, true)), g.leaf(b, true)));
    g.backward(nd::neg(nd::mean(nd::log(nd::pick(probs, y_train)))));
    opt.step();
  }

  const auto argmax = [](std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  };
  ProbeResult out;
  out.chance_objects = 1.0 / static_cast<double>(O);
  out.chance_states = 1.0 / static_cast<double>(S);
  std::size_t probe_hits = 0, den_hits = 0, state_hits = 0;
  for (std::size_t i = 0; i < test_idx.size(); ++i) {
    const auto& s = dataset.samples[test_idx[i]];
    double best = -INFINITY;
    std::size_t guess = 0;
    for (std::size_t o = 0; o < O; ++o) {
      double z = b[o];
      for (std::size_t c = 0; c < h; ++c) z += x_test.at(i, c) * w.at(c, o);
      if (z > best) {
        best = z;
        guess = o;
      }
    }
    probe_hits += guess == s.object;
    den_hits += argmax(test.den_s.row(i)) == s.object;
    state_hits += argmax(test.pd_s.row(i)) == s.state;
  }
  const double m = static_cast<double>(test_idx.size());
  out.probe_accuracy = static_cast<double>(probe_hits) / m;
  out.denoiser_accuracy = static_cast<double>(den_hits) / m;
  out.disentangled_state_accuracy = static_cast<double>(state_hits) / m;
  return out;
}

}  // namespace sadsp::analysis
