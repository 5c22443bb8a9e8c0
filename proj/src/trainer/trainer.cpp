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

#include "sadsp/trainer/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "sadsp/binary_io.hpp"
#include "sadsp/errors.hpp"
#include "sadsp/ndkit/adam.hpp"

namespace sadsp::trainer {

std::string regime_name(Regime r) { return r == Regime::end_to_end ? "end_to_end" : "fixed_trunk"; }

Regime parse_regime(const std::string& text) {
  if (text == "end_to_end") return Regime::end_to_end;
  if (text == "fixed_trunk") return Regime::fixed_trunk;
  throw ContractError("unknown regime '" + text + "' (expected end_to_end or fixed_trunk)");
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ContractError("epochs must be >= 0");
  if (batch_size == 0) throw ContractError("batch_size must be >= 1");
  if (!(lr_trunk > 0.0 && lr_adversary > 0.0 && lr_other > 0.0)) {
    throw ContractError("learning rates must be positive");
  }
  if (!(weight_decay >= 0.0)) throw ContractError("weight_decay must be >= 0");
  if (adversary_steps_per_batch < 0) throw ContractError("adversary_steps_per_batch must be >= 0");
}

nd::Tensor feature_batch(const data::Dataset& dataset, std::span<const std::size_t> indices) {
  const std::size_t d = dataset.spec.feature_dim;
  nd::Tensor x = nd::Tensor::zeros({indices.size(), d});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto& f = dataset.samples[indices[r]].features;
    for (std::size_t c = 0; c < d; ++c) x.at(r, c) = static_cast<double>(f[c]);
  }
  return x;
}

losses::Labels label_batch(const data::Dataset& dataset, std::span<const std::size_t> indices) {
  losses::Labels y;
  for (std::size_t i : indices) {
    y.states.push_back(dataset.samples[i].state);
    y.objects.push_back(dataset.samples[i].object);
  }
  return y;
}

namespace {

void accumulate(losses::LossReport& into, const losses::LossReport& r) {
  into.l_sp += r.l_sp;
  into.l_att += r.l_att;
  into.l_dc += r.l_dc;
  into.l_den_max += r.l_den_max;
  into.l_den_min += r.l_den_min;
  into.l_dis_max += r.l_dis_max;
  into.l_dis_min += r.l_dis_min;
  into.l_total += r.l_total;
}

void scale(losses::LossReport& r, double k) {
  for (double* v : {&r.l_sp, &r.l_att, &r.l_dc, &r.l_den_max, &r.l_den_min, &r.l_dis_max, &r.l_dis_min, &r.l_total}) {
    *v *= k;
  }
}

}  // namespace

TrainResult train(model::ModelParams params, const data::Dataset& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  const model::Dims& dims = params.dims();
  if (dims.num_states != dataset.spec.num_states || dims.num_objects != dataset.spec.num_objects ||
      dims.feature_dim != dataset.spec.feature_dim) {
    throw DimensionError("model dimensions do not match the dataset");
  }
  const std::vector<std::size_t> train_indices = dataset.indices_of(data::Split::train);
  if (train_indices.empty()) throw ContractError("dataset has no training samples");

  auto adam = [&](model::ParamGroup group, double lr) {
    return nd::Adam(params.tensors(group), nd::AdamConfig{lr, 0.9, 0.999, 1e-8, config.weight_decay});
  };
  nd::Adam trunk_opt = adam(model::ParamGroup::trunk, config.lr_trunk);
  nd::Adam other_opt = adam(model::ParamGroup::other, config.lr_other);
  nd::Adam adversary_opt = adam(model::ParamGroup::adversary, config.lr_adversary);
  const bool freeze_trunk = config.regime == Regime::fixed_trunk;

  TrainResult result;
  const auto run_start = std::chrono::steady_clock::now();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    const auto batches = data::minibatches(train_indices.size(), config.batch_size, config.seed,
                                           static_cast<std::uint64_t>(epoch));
    EpochLog entry;
    entry.epoch = epoch + 1;
    losses::LossReport generator_sum, adversary_sum;
    int batch_no = 0;
    for (const auto& batch : batches) {
      ++batch_no;
      std::vector<std::size_t> rows;
      rows.reserve(batch.size());
      for (std::size_t k : batch) rows.push_back(train_indices[k]);
      const nd::Tensor x = feature_batch(dataset, rows);
      const losses::Labels y = label_batch(dataset, rows);

      auto guard = [&](const losses::LossReport& r, const char* phase) {
        if (!r.all_finite()) {
          std::ostringstream msg;
          msg << "non-finite " << phase << " loss at epoch " << entry.epoch << ", batch " << batch_no;
          throw TrainingError(msg.str(), entry.epoch, batch_no);
        }
      };

      losses::LossReport adversary_report;
      for (int step = 0; step < config.adversary_steps_per_batch; ++step) {
        params.zero_grad();
        nd::Graph graph;
        const auto bundle = model::forward(params, graph, x, {model::Phase::adversary, freeze_trunk});
        const auto terms = losses::loss_total(bundle, y, losses::Objective::adversary_phase);
        guard(terms.report, "adversary");
        graph.backward(terms.total);
        adversary_opt.step();
        adversary_report = terms.report;
      }

      params.zero_grad();
      nd::Graph graph;
      const auto bundle = model::forward(params, graph, x, {model::Phase::generator, freeze_trunk});
      const auto terms = losses::loss_total(bundle, y, losses::Objective::generator_phase);
      guard(terms.report, "generator");
      graph.backward(terms.total);
      other_opt.step();
      if (!freeze_trunk) trunk_opt.step();

      accumulate(generator_sum, terms.report);
      accumulate(adversary_sum, adversary_report);
    }
    const double inv = 1.0 / static_cast<double>(batches.size());
    scale(generator_sum, inv);
    scale(adversary_sum, inv);
    entry.losses = generator_sum;
    entry.losses.l_den_max = adversary_sum.l_den_max;
    entry.losses.l_dis_max = adversary_sum.l_dis_max;
    entry.adversary_total = adversary_sum.l_total;
    entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_start).count();
    result.log.epochs.push_back(entry);
    if (on_epoch) on_epoch(entry, params);
  }
  params.zero_grad();
  result.log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - run_start).count();
  result.params = std::move(params);
  return result;
}

void write_train_log_csv(const TrainLog& log, const std::filesystem::path& path) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,l_sp,l_att,l_dc,l_den_max,l_den_min,l_dis_max,l_dis_min,l_total,adversary_total\n";
  for (const EpochLog& e : log.epochs) {
    const auto& r = e.losses;
    out << e.epoch << ',' << r.l_sp << ',' << r.l_att << ',' << r.l_dc << ',' << r.l_den_max << ',' << r.l_den_min
        << ',' << r.l_dis_max << ',' << r.l_dis_min << ',' << r.l_total << ',' << e.adversary_total << '\n';
  }
  io::write_text(path, out.str());
}

}  // namespace sadsp::trainer
