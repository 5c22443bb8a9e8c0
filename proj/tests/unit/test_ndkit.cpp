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

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "sadsp/errors.hpp"
#include "sadsp/ndkit/adam.hpp"
#include "sadsp/ndkit/ops.hpp"
#include "sadsp/random.hpp"

namespace sadsp::nd {
namespace {

constexpr double kGradTol = 1e-4;

Tensor random_matrix(std::size_t r, std::size_t c, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  std::vector<double> v(r * c);
  for (auto& x : v) x = rng.uniform(lo, hi);
  Tensor t = Tensor::matrix(r, c, v);
  t.set_requires_grad(true);
  return t;
}

TEST(Tensor, ShapeAndAccess) {
  Tensor t = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t.at(1, 2), 6.0);
  EXPECT_EQ(Tensor::scalar(2.5).item(), 2.5);
  EXPECT_THROW(Tensor::matrix(2, 2, {1, 2, 3}), DimensionError);
}

TEST(Tensor, GradBufferFollowsFlag) {
  Tensor t = Tensor::zeros({2, 2});
  EXPECT_FALSE(t.has_grad());
  t.set_requires_grad(true);
  ASSERT_EQ(t.grad().size(), 4u);
  const std::vector<double> d = {1, 2, 3, 4};
  t.accumulate_grad(d);
  t.accumulate_grad(d);
  EXPECT_EQ(t.grad()[3], 8.0);
  t.zero_grad();
  EXPECT_EQ(t.grad()[3], 0.0);
}

TEST(Ops, MatmulValues) {
  Graph g;
  Var a = g.constant(Tensor::matrix({{1, 2}, {3, 4}}));
  Var b = g.constant(Tensor::matrix({{5, 6}, {7, 8}}));
  const Tensor& c = matmul(a, b).value();
  EXPECT_EQ(c.at(0, 0), 19.0);
  EXPECT_EQ(c.at(0, 1), 22.0);
  EXPECT_EQ(c.at(1, 0), 43.0);
  EXPECT_EQ(c.at(1, 1), 50.0);
}

TEST(Ops, MatmulRejectsMismatch) {
  Graph g;
  Var a = g.constant(Tensor::zeros({2, 3}));
  Var b = g.constant(Tensor::zeros({2, 3}));
  EXPECT_THROW(matmul(a, b), DimensionError);
}

TEST(Ops, SoftmaxMatchesExtendedPrecision) {
  const Tensor logits = Tensor::matrix({{0.3, -2.0, 5.0, 1.0}, {700.0, 699.0, -700.0, 0.0}});
  const Tensor p = softmax_values(logits);
  for (std::size_t r = 0; r < 2; ++r) {
    const std::vector<double> row = {logits.at(r, 0), logits.at(r, 1), logits.at(r, 2), logits.at(r, 3)};
    const auto ref = oracle::softmax(row);
    double total = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_NEAR(p.at(r, c), ref[c], 1e-15);
      total += p.at(r, c);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Ops, LogClampHasZeroGradient) {
  Tensor x = Tensor::matrix(1, 2, {0.0, 0.5});
  x.set_requires_grad(true);
  Graph g;
  Var v = g.leaf(x);
  Var y = sum(log(v));
  EXPECT_NEAR(y.value().item(), std::log(kLogFloor) + std::log(0.5), 1e-12);
  g.backward(y);
  EXPECT_EQ(x.grad()[0], 0.0);
  EXPECT_DOUBLE_EQ(x.grad()[1], 2.0);
}

TEST(Ops, ReluPropagatesNaN) {
  Graph g;
  Var v = g.constant(Tensor::vector({std::nan(""), -1.0, 2.0}));
  const Tensor& r = relu(v).value();
  EXPECT_TRUE(std::isnan(r[0]));
  EXPECT_EQ(r[1], 0.0);
  EXPECT_EQ(r[2], 2.0);
}

TEST(Ops, UntrackedLeafGetsNoGradient) {
  Tensor w = random_matrix(2, 2, 1);
  Tensor frozen = random_matrix(2, 2, 2);
  Graph g;
  Var y = sum(matmul(g.leaf(w), g.leaf(frozen, false)));
  g.backward(y);
  for (double d : frozen.grad()) EXPECT_EQ(d, 0.0);
  bool any = false;
  for (double d : w.grad()) any = any || d != 0.0;
  EXPECT_TRUE(any);
}

TEST(Ops, DetachStopsGradient) {
  Tensor w = random_matrix(2, 2, 3);
  Graph g;
  Var v = g.leaf(w);
  Var y = sum(mul(detach(v), v));
  g.backward(y);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(w.grad()[i], w[i]);
}

// Each op composed into a scalar and checked against central differences.
struct OpCase {
  const char* name;
  std::function<Var(Graph&, Tensor&, Tensor&, Tensor&)> build;
};

class OpGradient : public ::testing::TestWithParam<int> {};

std::vector<OpCase> op_cases() {
  const std::vector<std::size_t> idx = {2, 0, 1};
  return {
      {"matmul", [](Graph& g, Tensor& a, Tensor& b, Tensor&) { return sum(square(matmul(g.leaf(a), g.leaf(b)))); }},
      {"add", [](Graph& g, Tensor& a, Tensor&, Tensor&) { return sum(square(add(g.leaf(a), g.leaf(a)))); }},
      {"sub_mul",
       [](Graph& g, Tensor& a, Tensor&, Tensor&) {
         Var x = g.leaf(a);
         return sum(mul(sub(x, scale(x, 0.3)), x));
       }},
      {"neg_relu", [](Graph& g, Tensor& a, Tensor&, Tensor&) { return sum(mul(relu(neg(g.leaf(a))), g.leaf(a))); }},
      {"sigmoid_log",
       [](Graph& g, Tensor& a, Tensor&, Tensor&) { return sum(log(add_scalar(sigmoid(g.leaf(a)), 0.1))); }},
      {"add_bias",
       [](Graph& g, Tensor& a, Tensor& b, Tensor& v) {
         return sum(square(add_bias(matmul(g.leaf(a), g.leaf(b)), g.leaf(v))));
       }},
      {"softmax_pick",
       [idx](Graph& g, Tensor& a, Tensor&, Tensor&) { return neg(mean(log(pick(softmax(g.leaf(a)), idx)))); }},
      {"slice_concat",
       [](Graph& g, Tensor& a, Tensor&, Tensor&) {
         Var x = g.leaf(a);
         return sum(square(concat_rows(slice_cols(x, 0, 2), slice_cols(x, 1, 3))));
       }},
      {"mean_scale", [](Graph& g, Tensor& a, Tensor&, Tensor&) { return scale(mean(square(g.leaf(a))), 3.0); }},
  };
}

TEST_P(OpGradient, MatchesCentralDifferences) {
  const auto cases = op_cases();
  const auto& c = cases[static_cast<std::size_t>(GetParam())];
  Tensor a = random_matrix(3, 3, 10 + GetParam());
  Tensor b = random_matrix(3, 2, 20 + GetParam());
  Tensor v = Tensor::vector({0.4, -0.7});
  v.set_requires_grad(true);
  const auto report =
      oracle::grad_check({{"a", &a}, {"b", &b}, {"v", &v}}, [&](Graph& g) { return c.build(g, a, b, v); });
  EXPECT_LT(report.max_rel_error, kGradTol) << c.name << ": " << report.worst;
  EXPECT_TRUE(report.nonzero_seen) << c.name;
}

INSTANTIATE_TEST_SUITE_P(AllOps, OpGradient, ::testing::Range(0, static_cast<int>(op_cases().size())));

TEST(Ops, AddBiasGradientSumsRows) {
  Tensor x = random_matrix(4, 3, 5);
  Tensor bias = Tensor::vector({0.1, 0.2, 0.3});
  bias.set_requires_grad(true);
  Graph g;
  Var y = sum(add_bias(g.leaf(x), g.leaf(bias)));
  g.backward(y);
  for (double d : bias.grad()) EXPECT_EQ(d, 4.0);
}

TEST(Adam, MatchesScalarReference) {
  Tensor p = Tensor::vector({0.5, -1.0, 2.0});
  p.set_requires_grad(true);
  const AdamConfig cfg{1e-2, 0.9, 0.999, 1e-8, 5e-5};
  Adam opt({&p}, cfg);
  std::vector<oracle::ScalarAdam> ref(3, oracle::ScalarAdam{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon,
                                                            cfg.weight_decay});
  std::vector<double> expected = {0.5, -1.0, 2.0};
  Rng rng(9);
  for (int step = 0; step < 25; ++step) {
    opt.zero_grad();
    std::vector<double> g(3);
    for (auto& x : g) x = rng.normal();
    p.accumulate_grad(g);
    opt.step();
    for (std::size_t i = 0; i < 3; ++i) expected[i] = ref[i].step(expected[i], g[i]);
  }
  EXPECT_EQ(opt.step_count(), 25);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p[i], expected[i], 1e-14);
}

TEST(Adam, ZeroGradientStillDecays) {
  Tensor p = Tensor::vector({1.0});
  p.set_requires_grad(true);
  Adam opt({&p}, AdamConfig{0.1, 0.9, 0.999, 1e-8, 0.5});
  opt.step();
  EXPECT_DOUBLE_EQ(p[0], 1.0 - 0.1 * 0.5);
}

}  // namespace
}  // namespace sadsp::nd
