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

#include "sadsp/cli/run_config.hpp"

#include <algorithm>
#include <sstream>

#include "sadsp/binary_io.hpp"
#include "sadsp/errors.hpp"
#include "sadsp/random.hpp"

namespace sadsp::cli {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"seed", "0", "master seed; also the dataset seed"},
      {"out", "run", "run directory"},
      {"data", "", "feature file (default <out>/features.bin)"},
      {"checkpoint", "", "checkpoint file (default <out>/model.ckpt)"},
      {"feasibility", "", "planted feasibility CSV for analyze (default <out>/feasibility.csv if present)"},

      {"num_states", "8", "synthetic |S|"},
      {"num_objects", "10", "synthetic |O|"},
      {"feature_dim", "32", "synthetic feature width d"},
      {"seen_fraction", "0.4", "seen compositions as a fraction of |S|*|O|"},
      {"feasible_fraction", "0.6", "planted feasible compositions as a fraction of |S|*|O|"},
      {"interaction", "2.0", "state-object interaction strength kappa"},
      {"noise", "0.5", "feature noise standard deviation"},
      {"prototype_dim", "16", "width of the primitive prototypes"},
      {"latent_rank", "2", "rank of the latent factor behind feasibility"},
      {"latent_coupling", "0.6", "weight of the latent factor in each prototype"},
      {"train_per_pair", "200", "training samples per seen composition"},
      {"test_per_pair", "40", "test samples per composition"},

      {"hidden", "64", "hidden width h"},
      {"epochs", "50", "training epochs"},
      {"batch_size", "16", "minibatch size"},
      {"lr_trunk", "5e-6", "learning rate of the feature trunk"},
      {"lr_adversary", "1e-2", "learning rate of the denoising and real/fake classifiers"},
      {"lr_other", "5e-5", "learning rate of every other module"},
      {"weight_decay", "5e-5", "decoupled weight decay"},
      {"adversary_steps", "1", "adversary updates per batch"},
      {"regime", "end_to_end", "end_to_end or fixed_trunk"},

      {"gamma", "0.7,0.25,0.05", "inference fusion weights"},
      {"disable", "", "comma list of branches to switch off: pf_s, pf_o, pc_s, pc_o"},
      {"bias_points", "201", "finite bias values in the calibration sweep"},
      {"gamma2_grid", "0.05:0.5:0.05", "gamma2 values for sweep (lo:hi:step or list)"},
      {"gamma3_grid", "0.05:0.5:0.05", "gamma3 values for sweep"},

      {"analysis_split", "train", "samples for attention analysis: train, test, all"},
      {"topk", "3", "list length for the feasible-pair rankings"},
      {"probe_epochs", "200", "full-batch epochs for the object-information probe"},
  };
  return keys;
}

namespace {

bool known(const std::string& key) {
  const auto& keys = config_keys();
  return std::any_of(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == key; });
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

RunConfig RunConfig::from_text(const std::string& text, const std::string& source) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      cfg.set_assignment(line);
    } catch (const UsageError& e) {
      throw UsageError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return from_text(std::string(bytes.begin(), bytes.end()), path.string());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!known(key)) throw UsageError("unknown config key '" + key + "'");
  values_[key] = value;
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw UsageError("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
  return it->second;
}

std::int64_t RunConfig::get_int(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t used = 0;
    const long long out = std::stoll(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw UsageError(key + ": expected an integer, got '" + v + "'");
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      const unsigned long long out = std::stoull(v, &used);
      if (used == v.size()) return out;
    }
  } catch (const std::exception&) {
  }
  throw UsageError(key + ": expected a nonnegative integer, got '" + v + "'");
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw UsageError(key + ": expected a number, got '" + v + "'");
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  for (const auto& k : config_keys()) out << k.name << '=' << values_.at(k.name) << '\n';
  return out.str();
}

std::filesystem::path RunConfig::out_dir() const { return get("out"); }

std::filesystem::path RunConfig::data_path() const {
  const std::string& v = get("data");
  return v.empty() ? out_dir() / "features.bin" : std::filesystem::path(v);
}

std::filesystem::path RunConfig::checkpoint_path() const {
  const std::string& v = get("checkpoint");
  return v.empty() ? out_dir() / "model.ckpt" : std::filesystem::path(v);
}

namespace {

std::size_t positive(const RunConfig& c, const std::string& key) {
  const std::int64_t v = c.get_int(key);
  if (v < 1) throw UsageError(key + " must be >= 1");
  return static_cast<std::size_t>(v);
}

}  // namespace

data::GeneratorConfig RunConfig::generator_config() const {
  data::GeneratorConfig g;
  g.num_states = positive(*this, "num_states");
  g.num_objects = positive(*this, "num_objects");
  g.feature_dim = positive(*this, "feature_dim");
  g.seed = get_u64("seed");
  g.prototype_dim = positive(*this, "prototype_dim");
  g.latent_rank = positive(*this, "latent_rank");
  g.latent_coupling = get_double("latent_coupling");
  g.interaction = get_double("interaction");
  g.noise = get_double("noise");
  g.feasible_fraction = get_double("feasible_fraction");
  g.seen_fraction = get_double("seen_fraction");
  g.train_per_pair = positive(*this, "train_per_pair");
  g.test_per_pair = positive(*this, "test_per_pair");
  return g;
}

model::Dims RunConfig::dims_for(const data::DatasetSpec& spec) const {
  return {spec.num_states, spec.num_objects, spec.feature_dim, positive(*this, "hidden")};
}

std::uint64_t RunConfig::init_seed() const { return Rng::derived(get_u64("seed"), 101).next_u64(); }

trainer::TrainConfig RunConfig::train_config() const {
  trainer::TrainConfig t;
  const std::int64_t epochs = get_int("epochs");
  if (epochs < 0) throw UsageError("epochs must be >= 0");
  t.epochs = static_cast<int>(epochs);
  t.batch_size = positive(*this, "batch_size");
  t.seed = Rng::derived(get_u64("seed"), 202).next_u64();
  t.lr_trunk = get_double("lr_trunk");
  t.lr_adversary = get_double("lr_adversary");
  t.lr_other = get_double("lr_other");
  t.weight_decay = get_double("weight_decay");
  const std::int64_t steps = get_int("adversary_steps");
  if (steps < 0) throw UsageError("adversary_steps must be >= 0");
  t.adversary_steps_per_batch = static_cast<int>(steps);
  try {
    t.regime = trainer::parse_regime(get("regime"));
    t.validate();
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
  return t;
}

eval::GammaWeights RunConfig::gamma() const {
  try {
    return eval::GammaWeights::parse(get("gamma"));
  } catch (const ContractError& e) {
    throw UsageError(std::string("gamma: ") + e.what());
  }
}

eval::BranchMask RunConfig::mask() const {
  try {
    return eval::BranchMask::from_disabled(get("disable"));
  } catch (const ContractError& e) {
    throw UsageError(std::string("disable: ") + e.what());
  }
}

eval::SweepConfig RunConfig::sweep_config() const { return {positive(*this, "bias_points")}; }

std::vector<double> parse_grid(const std::string& text) {
  const auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("bad grid value '" + s + "' in '" + text + "'");
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    std::string part;
    while (std::getline(in, part, ':')) parts.push_back(trim(part));
    if (parts.size() != 3) throw UsageError("grid range must be lo:hi:step, got '" + text + "'");
    try {
      return eval::GridConfig::grid_values(number(parts[0]), number(parts[1]), number(parts[2]));
    } catch (const ContractError& e) {
      throw UsageError(e.what());
    }
  }
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(number(item));
  }
  if (out.empty()) throw UsageError("empty grid");
  return out;
}

eval::GridConfig RunConfig::grid_config() const {
  eval::GridConfig g;
  g.gamma2 = parse_grid(get("gamma2_grid"));
  g.gamma3 = parse_grid(get("gamma3_grid"));
  try {
    g.validate();
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
  return g;
}

void RunConfig::validate() const {
  (void)generator_config();
  (void)train_config();
  (void)gamma();
  (void)mask();
  (void)sweep_config();
  (void)grid_config();
  const std::string& split = get("analysis_split");
  if (split != "train" && split != "test" && split != "all") {
    throw UsageError("analysis_split must be train, test or all");
  }
  (void)positive(*this, "topk");
  (void)positive(*this, "probe_epochs");
  (void)positive(*this, "hidden");
}

}  // namespace sadsp::cli
