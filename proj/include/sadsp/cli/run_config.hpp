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
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sadsp/data/synthetic.hpp"
#include "sadsp/eval/evaluation.hpp"
#include "sadsp/eval/inference.hpp"
#include "sadsp/trainer/trainer.hpp"

namespace sadsp::cli {

// Bad flag, key, or value. Maps to exit code 1.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

// Every accepted key with its default, in echo order.
const std::vector<ConfigKey>& config_keys();

// Flat key=value configuration. '#' starts a comment; blank lines are
// ignored. Unknown keys and malformed values raise UsageError.
class RunConfig {
 public:
  RunConfig();

  static RunConfig from_text(const std::string& text, const std::string& source = "<config>");
  static RunConfig from_file(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  // "key=value"
  void set_assignment(const std::string& assignment);
  const std::string& get(const std::string& key) const;

  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;

  // Every key, defaults filled in, one "key=value" per line.
  std::string to_text() const;

  std::filesystem::path out_dir() const;
  std::filesystem::path data_path() const;        // defaults to <out>/features.bin
  std::filesystem::path checkpoint_path() const;  // defaults to <out>/model.ckpt

  data::GeneratorConfig generator_config() const;
  model::Dims dims_for(const data::DatasetSpec& spec) const;
  std::uint64_t init_seed() const;
  trainer::TrainConfig train_config() const;
  eval::GammaWeights gamma() const;
  eval::BranchMask mask() const;
  eval::SweepConfig sweep_config() const;
  eval::GridConfig grid_config() const;

  // Checks that every typed key parses. Throws UsageError otherwise.
  void validate() const;

 private:
  std::map<std::string, std::string> values_;
};

// "0.25" or "0.05:0.5:0.05" or "0.1,0.2".
std::vector<double> parse_grid(const std::string& text);

}  // namespace sadsp::cli
