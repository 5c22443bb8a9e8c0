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

#include "loss_fixtures.hpp"
#include "sadsp/errors.hpp"
#include "sadsp/losses/losses.hpp"
#include "sadsp/ndkit/ops.hpp"

namespace sadsp::losses {
namespace {

using model::Module;

nd::Tensor filled(std::size_t rows, std::size_t cols, double v) {
  return nd::Tensor::matrix(rows, cols, std::vector<double>(rows * cols, v));
}

nd::Tensor one_hot_rows(const std::vector<std::size_t>& labels, std::size_t cols) {
  nd::Tensor t = filled(labels.size(), cols, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) t.at(i, labels[i]) = 1.0;
  return t;
}

// Random rows on the simplex, entries bounded away from zero.
nd::Tensor random_simplex(std::size_t rows, std::size_t cols, Rng& rng) {
  nd::Tensor t = filled(rows, cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += (t.at(r, c) = rng.uniform(0.05, 1.0));
    for (std::size_t c = 0; c < cols; ++c) t.at(r, c) /= total;
  }
  return t;
}

// Every head uniform, attention `a`, discriminators `d`.
model::ForwardBundle constant_bundle(nd::Graph& g, std::size_t B, std::size_t S, std::size_t O, double a,
                                     double d) {
  model::ForwardBundle b;
  b.options = {model::Phase::full, false};
  b.batch = B;
  b.p_s = g.constant(filled(B, S, 1.0 / S));
  b.p_o = g.constant(filled(B, O, 1.0 / O));
  b.a_s = g.constant(filled(B, S, a));
  b.a_o = g.constant(filled(B, O, a));
  b.pd_s_real = b.pd_s_gen = b.p_s;
  b.pd_o_real = b.pd_o_gen = b.p_o;
  b.den_s_real = b.den_s_gen = g.constant(filled(B, O, 1.0 / O));
  b.den_o_real = b.den_o_gen = g.constant(filled(B, S, 1.0 / S));
  b.dis_s_real = b.dis_s_gen = b.dis_o_real = b.dis_o_gen = g.constant(filled(B, 1, d));
  return b;
}

const Labels kLabels{{0, 3, 1}, {2, 2, 0}};

TEST(LossSp, UniformFourByFour) {
  nd::Graph g;
  const auto b = constant_bundle(g, 3, 4, 4, 0.5, 0.5);
  EXPECT_NEAR(loss_sp(b, kLabels).value().item(), 2.0 * std::log(4.0), 1e-12);
}

TEST(LossSp, PerfectPredictionIsZero) {
  nd::Graph g;
  auto b = constant_bundle(g, 3, 4, 4, 0.5, 0.5);
  b.p_s = g.constant(one_hot_rows(kLabels.states, 4));
  b.p_o = g.constant(one_hot_rows(kLabels.objects, 4));
  EXPECT_EQ(loss_sp(b, kLabels).value().item(), 0.0);
}

TEST(LossSp, MatchesExtendedPrecisionFormula) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    nd::Graph g;
    auto b = constant_bundle(g, 3, 4, 5, 0.5, 0.5);
    const nd::Tensor ps = random_simplex(3, 4, rng), po = random_simplex(3, 5, rng);
    b.p_s = g.constant(ps);
    b.p_o = g.constant(po);
    const Labels y{{1, 0, 3}, {4, 2, 0}};
    long double ref = 0.0L;
    for (std::size_t i = 0; i < 3; ++i) {
      ref -= std::log(static_cast<long double>(ps.at(i, y.states[i])));
      ref -= std::log(static_cast<long double>(po.at(i, y.objects[i])));
    }
    ref /= 3.0L;
    EXPECT_NEAR(loss_sp(b, y).value().item(), static_cast<double>(ref), 1e-10);
  }
}

TEST(LossSp, RejectsLabelCountMismatch) {
  nd::Graph g;
  const auto b = constant_bundle(g, 2, 4, 4, 0.5, 0.5);
  EXPECT_THROW(loss_sp(b, kLabels), ContractError);
}

TEST(LossAtt, EightTenthsWithHalfAttention) {
  nd::Graph g;
  auto b = constant_bundle(g, 1, 3, 3, 0.5, 0.5);
  b.p_s = b.p_o = g.constant(nd::Tensor::matrix({{0.8, 0.1, 0.1}}));
  const Labels y{{0}, {0}};
  EXPECT_NEAR(loss_att(b, y).value().item(), -2.0 * std::log(1.2), 1e-12);
}

TEST(LossAtt, VanishingAttentionApproachesSp) {
  Rng rng(6);
  nd::Graph g;
  auto b = constant_bundle(g, 3, 4, 4, 1e-6, 0.5);
  b.p_s = g.constant(random_simplex(3, 4, rng));
  b.p_o = g.constant(random_simplex(3, 4, rng));
  EXPECT_LT(std::abs(loss_att(b, kLabels).value().item() - loss_sp(b, kLabels).value().item()), 1e-4);
}

TEST(LossAtt, CanBeNegative) {
  nd::Graph g;
  auto b = constant_bundle(g, 1, 2, 2, 0.9, 0.5);
  b.p_s = b.p_o = g.constant(nd::Tensor::matrix({{0.95, 0.05}}));
  EXPECT_LT(loss_att(b, Labels{{0}, {0}}).value().item(), 0.0);
}

TEST(LossDc, UniformIsTwoLogFour) {
  nd::Graph g;
  const auto b = constant_bundle(g, 3, 4, 4, 0.5, 0.5);
  EXPECT_NEAR(loss_dc(b, kLabels).value().item(), 2.0 * std::log(4.0), 1e-12);
}

TEST(LossDc, PerfectIsZero) {
  nd::Graph g;
  auto b = constant_bundle(g, 3, 4, 4, 0.5, 0.5);
  b.pd_s_real = b.pd_s_gen = g.constant(one_hot_rows(kLabels.states, 4));
  b.pd_o_real = b.pd_o_gen = g.constant(one_hot_rows(kLabels.objects, 4));
  EXPECT_EQ(loss_dc(b, kLabels).value().item(), 0.0);
}

TEST(LossDc, IsMeanOfRealAndGeneratedTerms) {
  Rng rng(8);
  nd::Graph g;
  auto b = constant_bundle(g, 3, 4, 4, 0.5, 0.5);
  b.pd_s_real = g.constant(random_simplex(3, 4, rng));
  b.pd_s_gen = g.constant(random_simplex(3, 4, rng));
  b.pd_o_real = g.constant(random_simplex(3, 4, rng));
  b.pd_o_gen = g.constant(random_simplex(3, 4, rng));
  const auto sp_on = [&](const nd::Var& ps, const nd::Var& po) {
    model::ForwardBundle view = b;
    view.p_s = ps;
    view.p_o = po;
    return loss_sp(view, kLabels).value().item();
  };
  const double expected = 0.5 * (sp_on(b.pd_s_real, b.pd_o_real) + sp_on(b.pd_s_gen, b.pd_o_gen));
  EXPECT_NEAR(loss_dc(b, kLabels).value().item(), expected, 1e-12);
}

TEST(LossDenMax, OneHotTargetIsZero) {
  nd::Graph g;
  auto b = constant_bundle(g, 3, 4, 4, 0.5, 0.5);
  b.den_o_real = b.den_o_gen = g.constant(one_hot_rows(kLabels.states, 4));
  b.den_s_real = b.den_s_gen = g.constant(one_hot_rows(kLabels.objects, 4));
  EXPECT_EQ(loss_den_max(b, kLabels).value().item(), 0.0);
}

TEST(LossDenMax, UniformStateTermIsThreeSixteenths) {
  nd::Graph g;
  auto b = constant_bundle(g, 3, 4, 4, 0.5, 0.5);
  b.den_s_real = b.den_s_gen = g.constant(one_hot_rows(kLabels.objects, 4));
  EXPECT_NEAR(loss_den_max(b, kLabels).value().item(), 3.0 / 16.0, 1e-15);
}

TEST(LossDenMin, UniformIsZeroOneHotIsThreeSixteenths) {
  nd::Graph g;
  auto b = constant_bundle(g, 3, 4, 4, 0.5, 0.5);
  EXPECT_EQ(loss_den_min(b).value().item(), 0.0);
  b.den_o_gen = g.constant(one_hot_rows(kLabels.states, 4));
  EXPECT_NEAR(loss_den_min(b).value().item(), 3.0 / 16.0, 1e-15);
}

TEST(LossDenMin, UsesClassScaling) {
  // |S| = 5: one-hot vs uniform has squared distance 4/5, scaled by 1/5.
  nd::Graph g;
  auto b = constant_bundle(g, 3, 5, 4, 0.5, 0.5);
  b.den_o_gen = g.constant(one_hot_rows(kLabels.states, 5));
  EXPECT_NEAR(loss_den_min(b).value().item(), 4.0 / 25.0, 1e-15);
}

TEST(LossDis, HalfEverywhere) {
  nd::Graph g;
  const auto b = constant_bundle(g, 3, 4, 4, 0.5, 0.5);
  EXPECT_NEAR(loss_dis_max(b).value().item(), 4.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(loss_dis_min(b).value().item(), 2.0 * std::log(2.0), 1e-12);
}

TEST(LossDis, PerfectDiscriminatorAndPerfectForgery) {
  nd::Graph g;
  auto b = constant_bundle(g, 3, 4, 4, 0.5, 0.5);
  b.dis_s_real = b.dis_o_real = g.constant(filled(3, 1, 1.0));
  b.dis_s_gen = b.dis_o_gen = g.constant(filled(3, 1, 0.0));
  EXPECT_EQ(loss_dis_max(b).value().item(), 0.0);
  b.dis_s_gen = b.dis_o_gen = g.constant(filled(3, 1, 1.0));
  EXPECT_EQ(loss_dis_min(b).value().item(), 0.0);
}

TEST(LossTotal, AllZeroTermsGiveZero) {
  nd::Graph g;
  auto b = constant_bundle(g, 3, 4, 4, 0.0, 1.0);
  b.p_s = b.pd_s_real = b.pd_s_gen = g.constant(one_hot_rows(kLabels.states, 4));
  b.p_o = b.pd_o_real = b.pd_o_gen = g.constant(one_hot_rows(kLabels.objects, 4));
  const auto terms = loss_total(b, kLabels, Objective::generator_phase);
  EXPECT_EQ(terms.report.l_total, 0.0);
}

TEST(LossTotal, ComponentsSumToTotal) {
  Rng rng(2);
  nd::Graph g;
  auto b = constant_bundle(g, 3, 4, 4, 0.3, 0.6);
  b.p_s = g.constant(random_simplex(3, 4, rng));
  b.pd_o_gen = g.constant(random_simplex(3, 4, rng));
  b.den_o_gen = g.constant(random_simplex(3, 4, rng));
  b.den_s_real = g.constant(random_simplex(3, 4, rng));
  const auto gen = loss_total(b, kLabels, Objective::generator_phase).report;
  EXPECT_NEAR(gen.l_total, gen.l_sp + gen.l_att + gen.l_dc + gen.l_den_min + gen.l_dis_min, 1e-12);
  const auto adv = loss_total(b, kLabels, Objective::adversary_phase).report;
  EXPECT_NEAR(adv.l_total, adv.l_dc + adv.l_den_max + adv.l_dis_max, 1e-12);
  EXPECT_TRUE(gen.all_finite());
}

TEST(LossTotal, ObjectiveMustMatchBundlePhase) {
  nd::Graph g;
  auto b = constant_bundle(g, 3, 4, 4, 0.5, 0.5);
  b.options.phase = model::Phase::adversary;
  EXPECT_THROW(loss_total(b, kLabels, Objective::generator_phase), ContractError);
  b.options.phase = model::Phase::generator;
  EXPECT_THROW(loss_total(b, kLabels, Objective::adversary_phase), ContractError);
  EXPECT_THROW(loss_total(b, kLabels, static_cast<Objective>(7)), ContractError);
}

TEST(LossTotal, DegenerateInputsStayFinite) {
  nd::Graph g;
  auto b = constant_bundle(g, 3, 4, 4, 0.0, 0.0);
  b.p_s = b.p_o = b.pd_s_gen = b.pd_o_real = g.constant(filled(3, 4, 0.0));
  b.dis_s_real = g.constant(filled(3, 1, 0.0));
  b.dis_o_gen = g.constant(filled(3, 1, 1.0));
  EXPECT_TRUE(loss_total(b, kLabels, Objective::generator_phase).report.all_finite());
  EXPECT_TRUE(loss_total(b, kLabels, Objective::adversary_phase).report.all_finite());
}

// Gradient-mask scans on a real model.
class LossMasks : public ::testing::Test {
 protected:
  model::ModelParams params = model::ModelParams::initialize({3, 4, 5, 6}, 17);
  nd::Tensor x = fixture::random_batch(4, 5, 1);
  Labels y = fixture::random_labels(4, 3, 4, 2);
};

TEST_F(LossMasks, DenMaxReachesOnlyDenoisers) {
  const auto scan = fixture::term_scan(params, x, y, fixture::Term::den_max, model::Phase::adversary);
  for (auto [m, nonzero] : scan.nonzero) {
    const bool den = m == Module::f_s_den || m == Module::f_o_den;
    EXPECT_EQ(nonzero, den) << model::module_name(m);
  }
}

TEST_F(LossMasks, DisMaxReachesOnlyDiscriminators) {
  const auto scan = fixture::term_scan(params, x, y, fixture::Term::dis_max, model::Phase::adversary);
  for (auto [m, nonzero] : scan.nonzero) {
    const bool dis = m == Module::f_s_dis || m == Module::f_o_dis;
    EXPECT_EQ(nonzero, dis) << model::module_name(m);
  }
}

TEST_F(LossMasks, DenMinAndDisMinMoveGeneratorsOnly) {
  for (auto term : {fixture::Term::den_min, fixture::Term::dis_min}) {
    const auto scan = fixture::term_scan(params, x, y, term, model::Phase::generator);
    for (Module m : {Module::f_s_den, Module::f_o_den, Module::f_s_dis, Module::f_o_dis}) {
      EXPECT_FALSE(scan.nonzero.at(m)) << model::module_name(m);
    }
    EXPECT_TRUE(scan.nonzero.at(Module::f_sg));
    EXPECT_TRUE(scan.nonzero.at(Module::f_og));
    EXPECT_TRUE(scan.nonzero.at(Module::trunk));
    EXPECT_FALSE(scan.nonzero.at(Module::f_s));
    EXPECT_FALSE(scan.nonzero.at(Module::f_ds));
  }
}

TEST_F(LossMasks, DcReachesClassifiersAndGeneratorsNotAdversaries) {
  const auto scan = fixture::term_scan(params, x, y, fixture::Term::dc, model::Phase::generator);
  for (Module m : {Module::f_ds, Module::f_do, Module::f_sg, Module::f_og, Module::trunk}) {
    EXPECT_TRUE(scan.nonzero.at(m)) << model::module_name(m);
  }
  for (Module m : {Module::f_s_den, Module::f_o_den, Module::f_s_dis, Module::f_o_dis, Module::f_sa}) {
    EXPECT_FALSE(scan.nonzero.at(m)) << model::module_name(m);
  }
}

TEST_F(LossMasks, PhasesPartitionParameters) {
  const auto adv = fixture::phase_scan(params, x, y, Objective::adversary_phase);
  const auto gen = fixture::phase_scan(params, x, y, Objective::generator_phase);
  for (Module m : model::all_modules()) {
    const bool adversary = fixture::is_adversary(m);
    const bool shared = fixture::is_disentangled_classifier(m);
    EXPECT_EQ(adv.nonzero.at(m), adversary || shared) << model::module_name(m);
    EXPECT_EQ(gen.nonzero.at(m), !adversary) << model::module_name(m);
  }
}

TEST(LossGradients, EveryTermMatchesFiniteDifferences) {
  const auto suite = fixture::loss_gradient_suite({3, 4, 5, 4}, 4, 31);
  ASSERT_EQ(suite.size(), 7u);
  for (const auto& [name, report] : suite) {
    EXPECT_LT(report.max_rel_error, 1e-4) << name << ": " << report.worst;
    EXPECT_TRUE(report.nonzero_seen) << name;
  }
}

}  // namespace
}  // namespace sadsp::losses
