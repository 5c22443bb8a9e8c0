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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "sadsp/data/dataset.hpp"
#include "sadsp/losses/losses.hpp"
#include "sadsp/model/model.hpp"

namespace sadsp::trainer {

enum class Regime { end_to_end, fixed_trunk };

std::string regime_name(Regime r);
// Throws ContractError for anything but "end_to_end" / "fixed_trunk".
Regime parse_regime(const std::string& text);

struct TrainConfig {
  int epochs = 50;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  double lr_trunk = 5.0e-6;
  double lr_adversary = 1.0e-2;  // f_den and f_dis
  double lr_other = 5.0e-5;
  double weight_decay = 5.0e-5;
  int adversary_steps_per_batch = 1;
  Regime regime = Regime::end_to_end;

  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  // Batch means. l_den_max / l_dis_max come from the adversary step, the
  // rest (and l_total) from the generator step.
  losses::LossReport losses;
  double adversary_total = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  double wall_seconds = 0.0;
  std::vector<std::filesystem::path> checkpoints;
};

struct TrainResult {
  model::ModelParams params;
  TrainLog log;
};

using EpochCallback = std::function<void(const EpochLog&, const model::ModelParams&)>;

// Alternating min-max schedule. Per batch: `adversary_steps_per_batch`
// adversary steps (f_den, f_dis at lr_adversary), then one generator step
// (trunk at lr_trunk unless fixed_trunk, everything else at lr_other), each
// on a fresh forward pass. Throws TrainingError on a non-finite loss.
TrainResult train(model::ModelParams params, const data::Dataset& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// epoch, each loss component, adversary total. Timing is left out so the
// file is reproducible byte for byte.
void write_train_log_csv(const TrainLog& log, const std::filesystem::path& path);

// Feature rows of the given samples as a B x d matrix.
nd::Tensor feature_batch(const data::Dataset& dataset, std::span<const std::size_t> indices);
losses::Labels label_batch(const data::Dataset& dataset, std::span<const std::size_t> indices);

}  // namespace sadsp::trainer
