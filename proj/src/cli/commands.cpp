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

#include "sadsp/cli/commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "sadsp/analysis/analysis.hpp"
#include "sadsp/binary_io.hpp"
#include "sadsp/data/feature_io.hpp"
#include "sadsp/data/synthetic.hpp"
#include "sadsp/errors.hpp"
#include "sadsp/eval/evaluation.hpp"
#include "sadsp/model/checkpoint.hpp"
#include "sadsp/trainer/trainer.hpp"

namespace sadsp::cli {

namespace fs = std::filesystem;

namespace {

fs::path prepare(const RunConfig& config, const std::string& command) {
  config.validate();
  const fs::path out = config.out_dir();
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create run directory " + out.string() + ": " + ec.message());
  io::write_text(out / "config.txt", "# effective configuration for '" + command + "'\n" + config.to_text());
  return out;
}

struct Loaded {
  data::Dataset dataset;
  model::ModelParams params;
};

Loaded load_inputs(const RunConfig& config) {
  Loaded in{data::load_feature_file(config.data_path()), model::load_checkpoint(config.checkpoint_path())};
  const auto& d = in.params.dims();
  const auto& s = in.dataset.spec;
  if (d.num_states != s.num_states || d.num_objects != s.num_objects || d.feature_dim != s.feature_dim) {
    std::ostringstream msg;
    msg << "checkpoint " << config.checkpoint_path().string() << " has |S|=" << d.num_states << " |O|=" << d.num_objects
        << " d=" << d.feature_dim << " but dataset " << config.data_path().string() << " has |S|=" << s.num_states
        << " |O|=" << s.num_objects << " d=" << s.feature_dim;
    throw DimensionError(msg.str());
  }
  return in;
}

std::string pct(double v) {
  std::ostringstream out;
  out.precision(2);
  out << std::fixed << 100.0 * v;
  return out.str();
}

std::optional<data::Split> analysis_split(const std::string& name) {
  if (name == "train") return data::Split::train;
  return std::nullopt;  // "test" and "all" are resolved by the caller
}

std::vector<std::size_t> analysis_indices(const data::Dataset& dataset, const std::string& name) {
  if (name == "test") return dataset.test_indices();
  return analysis::select(dataset, analysis_split(name));
}

std::vector<char> read_feasibility(const fs::path& path, std::size_t S, std::size_t O) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> mask(S * O, 0);
  std::string line;
  std::getline(in, line);  // header
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream cells(line);
    std::string a, b, c;
    if (!std::getline(cells, a, ',') || !std::getline(cells, b, ',') || !std::getline(cells, c, ',')) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected state,object,feasible");
    }
    try {
      const std::size_t s = std::stoul(a), o = std::stoul(b);
      if (s >= S || o >= O) throw ParseError("");
      mask[s * O + o] = c == "1" ? 1 : 0;
    } catch (const std::exception&) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad pair");
    }
  }
  return mask;
}

}  // namespace

void cmd_gen(const RunConfig& config, std::ostream& log) {
  const fs::path out = prepare(config, "gen");
  const data::SyntheticData synth = data::generate_synthetic(config.generator_config());
  data::write_feature_file(synth.dataset, config.data_path());
  data::write_pair_sidecar(synth.dataset, out / "pairs.txt");

  const auto& spec = synth.dataset.spec;
  std::ostringstream csv;
  csv << "state,object,feasible,seen\n";
  for (const auto& p : data::open_world_pairs(spec)) {
    csv << p.state << ',' << p.object << ',' << (synth.world.feasible(p) ? 1 : 0) << ',' << (spec.is_seen(p) ? 1 : 0)
        << '\n';
  }
  io::write_text(out / "feasibility.csv", csv.str());
  log << "wrote " << config.data_path().string() << ": " << synth.dataset.samples.size() << " samples, "
      << spec.seen_pairs.size() << " seen of " << spec.num_pairs() << " pairs\n";
}

void cmd_train(const RunConfig& config, std::ostream& log) {
  const fs::path out = prepare(config, "train");
  const data::Dataset dataset = data::load_feature_file(config.data_path());
  const trainer::TrainConfig tc = config.train_config();
  model::ModelParams init = model::ModelParams::initialize(config.dims_for(dataset.spec), config.init_seed());
  const auto result = trainer::train(std::move(init), dataset, tc, [&](const trainer::EpochLog& e, const auto&) {
    if (e.epoch == 1 || e.epoch % 10 == 0 || e.epoch == tc.epochs) {
      log << "epoch " << e.epoch << " generator " << e.losses.l_total << " adversary " << e.adversary_total << '\n';
    }
  });
  model::save_checkpoint(result.params, config.checkpoint_path());
  trainer::write_train_log_csv(result.log, out / "train_log.csv");
  log << "wrote " << config.checkpoint_path().string() << " after " << tc.epochs << " epochs ("
      << result.log.wall_seconds << " s)\n";
}

void cmd_eval(const RunConfig& config, std::ostream& log) {
  const fs::path out = prepare(config, "eval");
  const Loaded in = load_inputs(config);
  const auto predictions = eval::predict_test(in.params, in.dataset);
  const auto table = eval::build_score_table(in.dataset, predictions.indices, predictions.raw, config.gamma(), config.mask());
  const auto summary = eval::evaluate_scores(table, in.dataset.spec.seen_pairs, config.sweep_config());
  eval::write_summary_csv(summary, out / "eval_summary.csv");
  eval::write_sweep_csv(summary, out / "eval_sweep.csv");
  eval::write_curve_csv(summary, out / "eval_curve.csv");
  eval::write_score_table(table, out / "scores.bin");
  log << "S " << pct(summary.best_S) << "  U " << pct(summary.best_U) << "  HM " << pct(summary.best_HM) << "  AUC "
      << pct(summary.auc) << '\n';
}

void cmd_ablate(const RunConfig& config, std::ostream& log) {
  const fs::path out = prepare(config, "ablate");
  const Loaded in = load_inputs(config);
  const auto rows = eval::run_ablation_suite(in.params, in.dataset, config.gamma(), config.sweep_config());
  eval::write_ablation_csv(rows, out / "ablation.csv");
  for (const auto& r : rows) {
    log << r.config.level << ' ' << r.config.name << ": AUC " << pct(r.summary.auc) << " HM " << pct(r.summary.best_HM)
        << '\n';
  }
}

void cmd_sweep(const RunConfig& config, std::ostream& log) {
  const fs::path out = prepare(config, "sweep");
  const Loaded in = load_inputs(config);
  const auto result =
      eval::gamma_sweep(in.params, in.dataset, config.grid_config(), config.mask(), config.sweep_config());
  eval::write_gamma_sweep_csv(result, out / "gamma_sweep.csv");
  std::size_t skipped = 0;
  for (const auto& r : result.rows) skipped += r.skipped;
  log << result.rows.size() << " grid points, " << skipped << " skipped";
  if (result.any_evaluated()) {
    const auto& best = result.rows[result.best];
    log << "; best gamma " << best.gamma.to_string() << " AUC " << pct(best.summary.auc);
  }
  log << '\n';
}

void cmd_analyze(const RunConfig& config, std::ostream& log) {
  const fs::path out = prepare(config, "analyze");
  const Loaded in = load_inputs(config);
  const auto& spec = in.dataset.spec;
  const std::string split = config.get("analysis_split");

  // Attention, in the chosen sample order.
  const auto indices = analysis_indices(in.dataset, split);
  const auto emb = analysis::embed(in.params, in.dataset, indices);
  std::vector<analysis::AttentionSample> samples;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& s = in.dataset.samples[indices[i]];
    const auto a_s = emb.a_s.row(i), a_o = emb.a_o.row(i);
    samples.push_back({s.state, s.object, {a_s.begin(), a_s.end()}, {a_o.begin(), a_o.end()}});
  }
  const auto M = analysis::accumulate_attention(spec.num_states, spec.num_objects, samples);
  analysis::write_matrix_csv(M, out / "attention_matrix.csv");
  analysis::write_heatmap_csv(M, out / "attention_heatmap.csv");
  analysis::write_matrix_csv(analysis::normalized(M, analysis::Normalization::state_conditioned_rows),
                             out / "attention_rows.csv");
  analysis::write_matrix_csv(analysis::normalized(M, analysis::Normalization::object_conditioned_cols),
                             out / "attention_cols.csv");

  const auto most = analysis::count_extremes(spec.num_states, spec.num_objects, samples, analysis::Extreme::max);
  const auto least = analysis::count_extremes(spec.num_states, spec.num_objects, samples, analysis::Extreme::min);
  analysis::write_frequency_csv(most, out / "frequency_max.csv");
  analysis::write_frequency_csv(least, out / "frequency_min.csv");

  const auto k = static_cast<std::size_t>(config.get_int("topk"));
  std::ostringstream topk;
  topk << "list,conditioning,primitive,space,position,state,object,count,truncated\n";
  for (const auto* table : {&most, &least}) {
    const char* list = table == &most ? "top" : "bottom";
    for (const auto cond : {analysis::Conditioning::on_state, analysis::Conditioning::on_object}) {
      const std::size_t n = cond == analysis::Conditioning::on_state ? spec.num_states : spec.num_objects;
      for (std::size_t p = 0; p < n; ++p) {
        for (const auto space : {analysis::Space::open_world, analysis::Space::unseen_only}) {
          const auto ranked = analysis::topk_feasible(*table, cond, p, k, analysis::Rank::top, space, spec.seen_pairs);
          for (std::size_t i = 0; i < ranked.items.size(); ++i) {
            topk << list << ',' << (cond == analysis::Conditioning::on_state ? "state" : "object") << ',' << p << ','
                 << (space == analysis::Space::open_world ? "open_world" : "unseen_only") << ',' << i + 1 << ','
                 << ranked.items[i].pair.state << ',' << ranked.items[i].pair.object << ',' << ranked.items[i].count
                 << ',' << (ranked.truncated ? 1 : 0) << '\n';
          }
        }
      }
    }
  }
  io::write_text(out / "topk.csv", topk.str());

  const auto report = analysis::prototype_report(in.params, in.dataset);
  analysis::write_prototype_csv(report, out / "prototypes.csv");
  io::write_text(out / "prototypes.txt", analysis::prototype_summary(report));

  analysis::ProbeConfig probe_cfg;
  probe_cfg.epochs = static_cast<int>(config.get_int("probe_epochs"));
  probe_cfg.seed = config.get_u64("seed");
  const auto probe = analysis::object_probe(in.params, in.dataset, probe_cfg);
  std::ostringstream probe_csv;
  probe_csv.precision(17);
  probe_csv << "measure,accuracy,chance\n"
            << "object_probe_on_disentangled_state," << probe.probe_accuracy << ',' << probe.chance_objects << '\n'
            << "object_denoiser_on_disentangled_state," << probe.denoiser_accuracy << ',' << probe.chance_objects << '\n'
            << "state_classifier_on_disentangled_state," << probe.disentangled_state_accuracy << ','
            << probe.chance_states << '\n';
  io::write_text(out / "probe.csv", probe_csv.str());

  // Planted feasibility, when the run directory came from `gen`.
  fs::path feas = config.get("feasibility");
  if (feas.empty() && fs::exists(out / "feasibility.csv")) feas = out / "feasibility.csv";
  if (!feas.empty()) {
    const auto mask = read_feasibility(feas, spec.num_states, spec.num_objects);
    double feasible_sum = 0.0, infeasible_sum = 0.0;
    std::size_t feasible_n = 0, infeasible_n = 0;
    for (const auto& p : data::open_world_pairs(spec)) {
      const std::size_t idx = spec.pair_index(p);
      if (!mask[idx]) {
        infeasible_sum += M.m[idx];
        ++infeasible_n;
      } else if (!spec.is_seen(p)) {
        feasible_sum += M.m[idx];
        ++feasible_n;
      }
    }
    std::ostringstream csv;
    csv.precision(17);
    csv << "group,pairs,mean_weight\n"
        << "feasible_unseen," << feasible_n << ',' << (feasible_n ? feasible_sum / feasible_n : 0.0) << '\n'
        << "infeasible," << infeasible_n << ',' << (infeasible_n ? infeasible_sum / infeasible_n : 0.0) << '\n';
    io::write_text(out / "attention_feasibility.csv", csv.str());
  }

  log << "attention over " << samples.size() << " samples; state prototype ratio "
      << report.state_original.ratio() << " -> " << report.state_disentangled.ratio() << "; object probe "
      << pct(probe.probe_accuracy) << "% (chance " << pct(probe.chance_objects) << "%)\n";
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"gen", "train", "eval", "ablate", "sweep", "analyze"};
  return names;
}

int run_command(const std::string& name, const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    if (name == "gen") {
      cmd_gen(config, log);
    } else if (name == "train") {
      cmd_train(config, log);
    } else if (name == "eval") {
      cmd_eval(config, log);
    } else if (name == "ablate") {
      cmd_ablate(config, log);
    } else if (name == "sweep") {
      cmd_sweep(config, log);
    } else if (name == "analyze") {
      cmd_analyze(config, log);
    } else {
      err << "error: unknown command '" << name << "'\n";
      return kUsage;
    }
    return kOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const TrainingError& e) {
    err << "training diverged: " << e.what() << '\n';
    return kDivergence;
  } catch (const DimensionError& e) {
    err << "dimension error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Simple-primitive compositional zero-shot learning with semantic attention and knowledge disentanglement"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path, out, gamma, disable, regime, data_path, checkpoint;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> assignments;
  app.add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out, "run directory");
  app.add_option("--gamma", gamma, "fusion weights, e.g. 0.7,0.25,0.05");
  app.add_option("--disable", disable, "branches to switch off: pf_s,pf_o,pc_s,pc_o");
  app.add_option("--regime", regime, "end_to_end or fixed_trunk");
  app.add_option("--data", data_path, "feature file");
  app.add_option("--checkpoint", checkpoint, "checkpoint file");
  app.add_option("--set", assignments, "override any config key (key=value), repeatable");

  const std::vector<std::pair<std::string, std::string>> help = {
      {"gen", "generate a synthetic feature file"},   {"train", "train and write a checkpoint"},
      {"eval", "bias-sweep evaluation"},              {"ablate", "module and branch ablations"},
      {"sweep", "gamma grid search"},                 {"analyze", "attention, prototype and probe analyses"}};
  for (const auto& [name, text] : help) app.add_subcommand(name, text);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  RunConfig config;
  try {
    if (!config_path.empty()) config = RunConfig::from_file(config_path);
    for (const auto& a : assignments) config.set_assignment(a);
    if (seed) config.set("seed", std::to_string(*seed));
    if (!out.empty()) config.set("out", out);
    if (!gamma.empty()) config.set("gamma", gamma);
    if (!disable.empty()) config.set("disable", disable);
    if (!regime.empty()) config.set("regime", regime);
    if (!data_path.empty()) config.set("data", data_path);
    if (!checkpoint.empty()) config.set("checkpoint", checkpoint);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return run_command(app.get_subcommands().front()->get_name(), config, std::cout, std::cerr);
}

}  // namespace sadsp::cli
