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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "sadsp/analysis/analysis.hpp"
#include "sadsp/data/synthetic.hpp"
#include "sadsp/errors.hpp"
#include "sadsp/random.hpp"

namespace sadsp::analysis {
namespace {

using data::Pair;

AttentionSample random_sample(std::size_t S, std::size_t O, Rng& rng) {
  AttentionSample x;
  x.state = rng.below(S);
  x.object = rng.below(O);
  x.a_s.resize(S);
  x.a_o.resize(O);
  for (auto& v : x.a_s) v = rng.uniform(0.0, 1.0);
  for (auto& v : x.a_o) v = rng.uniform(0.0, 1.0);
  return x;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

TEST(Accumulate, EmptyDatasetLeavesZeros) {
  const auto M = accumulate_attention(3, 4, std::span<const AttentionSample>{});
  EXPECT_EQ(M.m, std::vector<double>(12, 0.0));
  EXPECT_TRUE(std::none_of(M.row_touched.begin(), M.row_touched.end(), [](bool b) { return b; }));
}

TEST(Accumulate, UniformAttentionGivesUniformRow) {
  const std::vector<AttentionSample> xs = {{1, 2, std::vector<double>(3, 0.5), std::vector<double>(4, 0.5)}};
  std::vector<AccumulationStep> trace;
  const auto M = accumulate_attention(3, 4, xs, AccumulationMode::interleaved_softmax, &trace);
  EXPECT_EQ(trace[0].row_after_row_update, std::vector<double>(4, 0.25));
  // Column 2 is rewritten afterwards; the rest of the row keeps 1/4.
  for (std::size_t o : {0u, 1u, 3u}) EXPECT_EQ(M.at(1, o), 0.25);
  EXPECT_NEAR(sum(M.col(2)), 1.0, 1e-12);
}

TEST(Accumulate, TwoSamplesMatchHandStepping) {
  Rng rng(21);
  const std::size_t S = 4, O = 5;
  const std::vector<AttentionSample> xs = {random_sample(S, O, rng), random_sample(S, O, rng)};
  oracle::HandMatrix hand{S, O, std::vector<double>(S * O, 0.0)};
  for (const auto& x : xs) oracle::hand_step(hand, x.state, x.object, x.a_s, x.a_o);
  const auto M = accumulate_attention(S, O, xs);
  for (std::size_t i = 0; i < S * O; ++i) EXPECT_NEAR(M.m[i], hand.m[i], 1e-12);
}

TEST(Accumulate, SharedRowAndColumnAcrossSamples) {
  // Both samples hit row 2 and column 1, so the second update reads the first.
  Rng rng(22);
  std::vector<AttentionSample> xs = {random_sample(3, 3, rng), random_sample(3, 3, rng)};
  xs[0].state = xs[1].state = 2;
  xs[0].object = xs[1].object = 1;
  oracle::HandMatrix hand{3, 3, std::vector<double>(9, 0.0)};
  for (const auto& x : xs) oracle::hand_step(hand, x.state, x.object, x.a_s, x.a_o);
  const auto M = accumulate_attention(3, 3, xs);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(M.m[i], hand.m[i], 1e-12);
}

TEST(Accumulate, EveryUpdatedRowAndColumnSumsToOne) {
  Rng rng(23);
  std::vector<AttentionSample> xs;
  for (int i = 0; i < 200; ++i) xs.push_back(random_sample(6, 7, rng));
  std::vector<AccumulationStep> trace;
  accumulate_attention(6, 7, xs, AccumulationMode::interleaved_softmax, &trace);
  ASSERT_EQ(trace.size(), xs.size());
  for (const auto& step : trace) {
    EXPECT_NEAR(sum(step.row_after_row_update), 1.0, 1e-9);
    EXPECT_NEAR(sum(step.col_after_col_update), 1.0, 1e-9);
  }
}

TEST(Accumulate, NormalizedViewsSumToOne) {
  Rng rng(24);
  std::vector<AttentionSample> xs;
  for (int i = 0; i < 30; ++i) xs.push_back(random_sample(4, 6, rng));
  const auto raw = accumulate_attention(4, 6, xs, AccumulationMode::raw_sum);
  const auto rows = normalized(raw, Normalization::state_conditioned_rows);
  const auto cols = normalized(raw, Normalization::object_conditioned_cols);
  EXPECT_EQ(rows.normalization, Normalization::state_conditioned_rows);
  for (std::size_t s = 0; s < 4; ++s) EXPECT_NEAR(sum(rows.row(s)), 1.0, 1e-9);
  for (std::size_t o = 0; o < 6; ++o) EXPECT_NEAR(sum(cols.col(o)), 1.0, 1e-9);
}

TEST(Accumulate, RawSumAddsAttention) {
  Rng rng(25);
  std::vector<AttentionSample> xs;
  for (int i = 0; i < 20; ++i) xs.push_back(random_sample(3, 4, rng));
  const auto M = accumulate_attention(3, 4, xs, AccumulationMode::raw_sum);
  std::vector<double> expect(12, 0.0);
  for (const auto& x : xs) {
    for (std::size_t o = 0; o < 4; ++o) expect[x.state * 4 + o] += x.a_o[o];
    for (std::size_t s = 0; s < 3; ++s) expect[s * 4 + x.object] += x.a_s[s];
  }
  for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(M.m[i], expect[i], 1e-12);
}

TEST(Accumulate, RejectsMisfitSample) {
  const std::vector<AttentionSample> xs = {{0, 5, std::vector<double>(2, 0.1), std::vector<double>(3, 0.1)}};
  EXPECT_THROW(accumulate_attention(2, 3, xs), DimensionError);
}

TEST(MinMax, RangeAndConstantMatrix) {
  FeasibilityMatrix M;
  M.num_states = 2;
  M.num_objects = 2;
  M.m = {1.0, 3.0, 2.0, 5.0};
  EXPECT_EQ(min_max(M), (std::vector<double>{0.0, 0.5, 0.25, 1.0}));
  M.m = {2.0, 2.0, 2.0, 2.0};
  EXPECT_EQ(min_max(M), std::vector<double>(4, 0.0));
}

TEST(Frequency, MarginalsEqualSampleCounts) {
  Rng rng(26);
  const std::size_t S = 5, O = 6;
  std::vector<AttentionSample> xs;
  for (int i = 0; i < 300; ++i) xs.push_back(random_sample(S, O, rng));
  for (Extreme e : {Extreme::max, Extreme::min}) {
    const auto t = count_extremes(S, O, xs, e);
    for (std::size_t s = 0; s < S; ++s) {
      std::uint64_t n = 0, c = 0;
      for (const auto& x : xs) n += x.state == s;
      for (std::size_t o = 0; o < O; ++o) c += t.count(Conditioning::on_state, s, o);
      EXPECT_EQ(c, n);
    }
    for (std::size_t o = 0; o < O; ++o) {
      std::uint64_t n = 0, c = 0;
      for (const auto& x : xs) n += x.object == o;
      for (std::size_t s = 0; s < S; ++s) c += t.count(Conditioning::on_object, s, o);
      EXPECT_EQ(c, n);
    }
  }
}

TEST(Frequency, TiesGoToLowestIndex) {
  const std::vector<AttentionSample> xs = {{1, 0, {0.3, 0.3, 0.1}, {0.2, 0.9, 0.9}}};
  const auto hi = count_extremes(3, 3, xs, Extreme::max);
  EXPECT_EQ(hi.count(Conditioning::on_state, 1, 1), 1u);
  EXPECT_EQ(hi.count(Conditioning::on_object, 0, 0), 1u);
  const auto lo = count_extremes(3, 3, xs, Extreme::min);
  EXPECT_EQ(lo.count(Conditioning::on_state, 1, 0), 1u);
  EXPECT_EQ(lo.count(Conditioning::on_object, 2, 0), 1u);
}

FrequencyTable flat_table(std::size_t S, std::size_t O, std::uint64_t value) {
  FrequencyTable t;
  t.num_states = S;
  t.num_objects = O;
  t.by_state.assign(S * O, value);
  t.by_object.assign(S * O, value);
  return t;
}

TEST(TopK, EqualCountsGiveFirstPairsByIndex) {
  const auto t = flat_table(3, 5, 4);
  const auto top = topk_feasible(t, Conditioning::on_state, 1, 3, Rank::top, Space::open_world, {});
  ASSERT_EQ(top.items.size(), 3u);
  EXPECT_FALSE(top.truncated);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(top.items[i].pair, (Pair{1, i}));
  const auto bottom = topk_feasible(t, Conditioning::on_object, 4, 2, Rank::bottom, Space::open_world, {});
  EXPECT_EQ(bottom.items[0].pair, (Pair{0, 4}));
  EXPECT_EQ(bottom.items[1].pair, (Pair{1, 4}));
}

TEST(TopK, OrdersByCountBothDirections) {
  auto t = flat_table(2, 4, 0);
  t.by_state = {3, 7, 1, 7, 0, 0, 0, 0};
  const auto top = topk_feasible(t, Conditioning::on_state, 0, 4, Rank::top, Space::open_world, {});
  EXPECT_EQ(top.items[0].pair, (Pair{0, 1}));
  EXPECT_EQ(top.items[1].pair, (Pair{0, 3}));
  EXPECT_EQ(top.items[2].pair, (Pair{0, 0}));
  const auto bottom = topk_feasible(t, Conditioning::on_state, 0, 1, Rank::bottom, Space::open_world, {});
  EXPECT_EQ(bottom.items[0].pair, (Pair{0, 2}));
  EXPECT_EQ(bottom.items[0].count, 1u);
}

TEST(TopK, UnseenOnlyExcludesSeenPairsAndFlagsShortLists) {
  const auto t = flat_table(3, 4, 1);
  const std::vector<Pair> seen = {{2, 0}, {2, 2}, {0, 1}};
  const auto r = topk_feasible(t, Conditioning::on_state, 2, 3, Rank::top, Space::unseen_only, seen);
  EXPECT_TRUE(r.truncated);
  ASSERT_EQ(r.items.size(), 2u);
  for (const auto& item : r.items) EXPECT_EQ(std::count(seen.begin(), seen.end(), item.pair), 0);
  EXPECT_THROW(topk_feasible(t, Conditioning::on_state, 0, 0, Rank::top, Space::open_world, {}), ContractError);
  EXPECT_THROW(topk_feasible(t, Conditioning::on_state, 3, 1, Rank::top, Space::open_world, {}), ContractError);
}

// Attention drawn with a bump on the world's feasible objects; top-k for each
// state should recover them better than a random relabelling of objects.
TEST(TopK, PlantedFeasibilityBeatsPermutationBaseline) {
  const auto world = data::generate_synthetic(data::GeneratorConfig{}).world;
  const std::size_t S = world.num_states, O = world.num_objects;
  Rng rng(27);
  std::vector<AttentionSample> xs;
  for (int i = 0; i < 2000; ++i) {
    AttentionSample x;
    x.state = rng.below(S);
    x.object = rng.below(O);
    x.a_s.assign(S, 0.5);
    for (std::size_t o = 0; o < O; ++o) {
      x.a_o.push_back(rng.uniform(0.0, 0.6) + (world.feasible({x.state, o}) ? 0.3 : 0.0));
    }
    xs.push_back(std::move(x));
  }
  const auto table = count_extremes(S, O, xs, Extreme::max);

  const auto recall = [&](const std::vector<std::size_t>& relabel) {
    double total = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      std::size_t k = 0;
      for (std::size_t o = 0; o < O; ++o) k += world.feasible({s, o});
      const auto top = topk_feasible(table, Conditioning::on_state, s, k, Rank::top, Space::open_world, {});
      std::size_t hit = 0;
      for (const auto& item : top.items) hit += world.feasible({s, relabel[item.pair.object]});
      total += static_cast<double>(hit) / static_cast<double>(k);
    }
    return total / static_cast<double>(S);
  };
  std::vector<std::size_t> identity(O);
  std::iota(identity.begin(), identity.end(), 0);
  const double planted = recall(identity);
  double baseline = 0.0;
  const int perms = 200;
  for (int p = 0; p < perms; ++p) {
    auto perm = identity;
    for (std::size_t i = O - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    baseline += recall(perm);
  }
  baseline /= perms;
  EXPECT_GT(planted, baseline + 0.2) << "planted " << planted << " baseline " << baseline;
}

Rows rows_of(std::size_t width, std::vector<double> values) { return {width, std::move(values)}; }

TEST(Prototype, IdenticalFeaturesHaveZeroSpread) {
  const auto r = rows_of(2, {1.0, 2.0, 1.0, 2.0, 5.0, 5.0, 7.0, 5.0});
  const std::vector<std::size_t> labels = {0, 0, 1, 1};
  const auto st = prototype_stats(r, labels, 2);
  EXPECT_EQ(st.spread[0], 0.0);
  EXPECT_EQ(st.spread[1], 1.0);
  EXPECT_EQ(st.prototypes[1], (std::vector<double>{6.0, 5.0}));
}

TEST(Prototype, SingletonAndOmittedClasses) {
  const auto r = rows_of(3, {0.1, 0.2, 0.3, 1.0, 1.0, 1.0, 3.0, 3.0, 3.0});
  const std::vector<std::size_t> labels = {2, 0, 0};
  const auto st = prototype_stats(r, labels, 4);
  EXPECT_EQ(st.classes, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(st.omitted, (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(st.prototypes[1], (std::vector<double>{0.1, 0.2, 0.3}));
  EXPECT_EQ(st.spread[1], 0.0);
  EXPECT_THROW(prototype_stats(r, std::vector<std::size_t>{0, 0}, 4), ContractError);
  EXPECT_THROW(prototype_stats(r, std::vector<std::size_t>{0, 0, 9}, 4), ContractError);
}

TEST(Prototype, DuplicatedDatasetKeepsPrototypes) {
  Rng rng(28);
  std::vector<double> v(40 * 3);
  for (auto& x : v) x = rng.normal();
  std::vector<std::size_t> labels(40);
  for (auto& l : labels) l = rng.below(5);
  const auto once = prototype_stats(rows_of(3, v), labels, 5);
  auto v2 = v;
  v2.insert(v2.end(), v.begin(), v.end());
  auto l2 = labels;
  l2.insert(l2.end(), labels.begin(), labels.end());
  const auto twice = prototype_stats(rows_of(3, v2), l2, 5);
  ASSERT_EQ(twice.classes, once.classes);
  for (std::size_t k = 0; k < once.classes.size(); ++k) {
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(twice.prototypes[k][c], once.prototypes[k][c], 1e-12);
    EXPECT_NEAR(twice.spread[k], once.spread[k], 1e-12);
  }
  EXPECT_NEAR(twice.ratio(), once.ratio(), 1e-12);
}

class ModelAnalysis : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data::GeneratorConfig c;
    c.train_per_pair = 3;
    c.test_per_pair = 3;
    dataset_ = new data::Dataset(data::generate_synthetic(c).dataset);
    params_ = new model::ModelParams(model::ModelParams::initialize({8, 10, 32, 16}, 9));
  }
  static void TearDownTestSuite() {
    delete dataset_;
    delete params_;
  }
  static data::Dataset* dataset_;
  static model::ModelParams* params_;
};
data::Dataset* ModelAnalysis::dataset_ = nullptr;
model::ModelParams* ModelAnalysis::params_ = nullptr;

TEST_F(ModelAnalysis, AccumulationIsDeterministicAndNormalized) {
  std::vector<AccumulationStep> trace;
  const auto a = accumulate_attention(*params_, *dataset_, data::Split::train,
                                      AccumulationMode::interleaved_softmax, &trace);
  const auto b = accumulate_attention(*params_, *dataset_, data::Split::train);
  EXPECT_EQ(a.m, b.m);
  EXPECT_EQ(trace.size(), dataset_->indices_of(data::Split::train).size());
  // A later row update rewrites one entry of an earlier column, so the
  // unit sum holds at the moment of each update, not in the final matrix.
  for (const auto& step : trace) {
    EXPECT_NEAR(sum(step.row_after_row_update), 1.0, 1e-9);
    EXPECT_NEAR(sum(step.col_after_col_update), 1.0, 1e-9);
  }
}

TEST_F(ModelAnalysis, EmbeddingsAndFrequencyShapes) {
  const auto idx = select(*dataset_, data::Split::test_seen);
  const auto emb = embed(*params_, *dataset_, idx);
  EXPECT_EQ(emb.a_s.count(), idx.size());
  EXPECT_EQ(emb.a_s.width, 8u);
  EXPECT_EQ(emb.a_o.width, 10u);
  EXPECT_EQ(select(*dataset_, std::nullopt).size(), dataset_->samples.size());
  const auto t = count_extremes(*params_, *dataset_, data::Split::test_seen, Extreme::max);
  const std::uint64_t total = std::accumulate(t.by_state.begin(), t.by_state.end(), std::uint64_t{0});
  EXPECT_EQ(total, idx.size());
}

TEST_F(ModelAnalysis, PrototypeReportCoversEveryClass) {
  const auto rep = prototype_report(*params_, *dataset_);
  EXPECT_EQ(rep.state_original.classes.size(), 8u);
  EXPECT_EQ(rep.object_disentangled.classes.size(), 10u);
  EXPECT_FALSE(prototype_summary(rep).empty());
}

TEST_F(ModelAnalysis, ProbeReportsAccuraciesInRange) {
  ProbeConfig pc;
  pc.epochs = 20;
  const auto r = object_probe(*params_, *dataset_, pc);
  EXPECT_DOUBLE_EQ(r.chance_objects, 0.1);
  EXPECT_DOUBLE_EQ(r.chance_states, 0.125);
  for (double v : {r.probe_accuracy, r.denoiser_accuracy, r.disentangled_state_accuracy}) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  const auto again = object_probe(*params_, *dataset_, pc);
  EXPECT_EQ(again.probe_accuracy, r.probe_accuracy);
}

}  // namespace
}  // namespace sadsp::analysis
