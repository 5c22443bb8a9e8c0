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

#include "sadsp/losses/losses.hpp"

#include <cmath>

#include "sadsp/errors.hpp"
#include "sadsp/ndkit/ops.hpp"

namespace sadsp::losses {

using nd::Var;

namespace {

void check_labels(const model::ForwardBundle& b, const Labels& y) {
  if (y.states.size() != b.batch || y.objects.size() != b.batch) {
    throw ContractError("labels must have one entry per bundle row");
  }
}

// Mean over rows of -log(probs[i, label_i]).
Var cross_entropy(const Var& probs, std::span<const std::size_t> labels) {
  return nd::neg(nd::mean(nd::log(nd::pick(probs, labels))));
}

nd::Tensor one_hot(std::span<const std::size_t> labels, std::size_t classes) {
  nd::Tensor t = nd::Tensor::zeros({labels.size(), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) t.at(i, labels[i]) = 1.0;
  return t;
}

// (1/classes) * sum ||probs - target||^2, averaged over rows.
Var scaled_mse(const Var& probs, const nd::Tensor& target) {
  nd::Graph& g = *probs.graph();
  const double rows = static_cast<double>(probs.value().rows());
  const double classes = static_cast<double>(probs.value().cols());
  return nd::scale(nd::sum(nd::square(nd::sub(probs, g.constant(target)))), 1.0 / (classes * rows));
}

std::vector<std::size_t> twice(const std::vector<std::size_t>& v) {
  std::vector<std::size_t> out(v);
  out.insert(out.end(), v.begin(), v.end());
  return out;
}

}  // namespace

bool LossReport::all_finite() const {
  for (double v : {l_sp, l_att, l_dc, l_den_max, l_den_min, l_dis_max, l_dis_min, l_total}) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Var loss_sp(const model::ForwardBundle& b, const Labels& y) {
  check_labels(b, y);
  return nd::add(cross_entropy(b.p_s, y.states), cross_entropy(b.p_o, y.objects));
}

Var loss_att(const model::ForwardBundle& b, const Labels& y) {
  check_labels(b, y);
  return nd::add(cross_entropy(model::attention_fuse(b.a_s, b.p_s), y.states),
                 cross_entropy(model::attention_fuse(b.a_o, b.p_o), y.objects));
}

Var loss_dc(const model::ForwardBundle& b, const Labels& y) {
  check_labels(b, y);
  const auto states = twice(y.states);
  const auto objects = twice(y.objects);
  return nd::add(cross_entropy(nd::concat_rows(b.pd_s_real, b.pd_s_gen), states),
                 cross_entropy(nd::concat_rows(b.pd_o_real, b.pd_o_gen), objects));
}

Var loss_den_max(const model::ForwardBundle& b, const Labels& y) {
  check_labels(b, y);
  const std::size_t S = b.den_o_real.value().cols();
  const std::size_t O = b.den_s_real.value().cols();
  const Var state_term = scaled_mse(nd::concat_rows(b.den_o_real, b.den_o_gen), one_hot(twice(y.states), S));
  const Var object_term = scaled_mse(nd::concat_rows(b.den_s_real, b.den_s_gen), one_hot(twice(y.objects), O));
  return nd::add(state_term, object_term);
}

Var loss_den_min(const model::ForwardBundle& b) {
  const std::size_t B = b.batch;
  const std::size_t S = b.den_o_gen.value().cols();
  const std::size_t O = b.den_s_gen.value().cols();
  nd::Tensor uniform_s = nd::Tensor::zeros({B, S});
  for (double& v : uniform_s.values()) v = 1.0 / static_cast<double>(S);
  nd::Tensor uniform_o = nd::Tensor::zeros({B, O});
  for (double& v : uniform_o.values()) v = 1.0 / static_cast<double>(O);
  return nd::add(scaled_mse(b.den_o_gen, uniform_s), scaled_mse(b.den_s_gen, uniform_o));
}

Var loss_dis_max(const model::ForwardBundle& b) {
  auto real_fake = [](const Var& real, const Var& fake) {
    const Var log_real = nd::log(real);
    const Var log_not_fake = nd::log(nd::add_scalar(nd::neg(fake), 1.0));
    return nd::neg(nd::mean(nd::add(log_real, log_not_fake)));
  };
  return nd::add(real_fake(b.dis_s_real, b.dis_s_gen), real_fake(b.dis_o_real, b.dis_o_gen));
}

Var loss_dis_min(const model::ForwardBundle& b) {
  return nd::add(nd::neg(nd::mean(nd::log(b.dis_s_gen))), nd::neg(nd::mean(nd::log(b.dis_o_gen))));
}

LossTerms loss_total(const model::ForwardBundle& b, const Labels& y, Objective objective) {
  const model::Phase phase = b.options.phase;
  switch (objective) {
    case Objective::generator_phase:
      if (phase != model::Phase::generator && phase != model::Phase::full) {
        throw ContractError("generator objective needs a generator-phase bundle");
      }
      break;
    case Objective::adversary_phase:
      if (phase != model::Phase::adversary && phase != model::Phase::full) {
        throw ContractError("adversary objective needs an adversary-phase bundle");
      }
      break;
    default:
      throw ContractError("unknown loss objective");
  }

  const Var sp = loss_sp(b, y);
  const Var att = loss_att(b, y);
  const Var dc = loss_dc(b, y);
  const Var den_max = loss_den_max(b, y);
  const Var den_min = loss_den_min(b);
  const Var dis_max = loss_dis_max(b);
  const Var dis_min = loss_dis_min(b);

  LossTerms out;
  LossReport& r = out.report;
  r.l_sp = sp.value().item();
  r.l_att = att.value().item();
  r.l_dc = dc.value().item();
  r.l_den_max = den_max.value().item();
  r.l_den_min = den_min.value().item();
  r.l_dis_max = dis_max.value().item();
  r.l_dis_min = dis_min.value().item();
  if (objective == Objective::generator_phase) {
    out.total = nd::add(nd::add(nd::add(nd::add(sp, att), dc), den_min), dis_min);
  } else {
    out.total = nd::add(nd::add(dc, den_max), dis_max);
  }
  r.l_total = out.total.value().item();
  return out;
}

}  // namespace sadsp::losses
