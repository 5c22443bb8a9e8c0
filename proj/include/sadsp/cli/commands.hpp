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

#include <ostream>
#include <string>
#include <vector>

#include "sadsp/cli/run_config.hpp"

namespace sadsp::cli {

// Each command writes config.txt plus its artifacts into the run directory
// and prints a short summary to `log`. Failures surface as exceptions.
void cmd_gen(const RunConfig& config, std::ostream& log);
void cmd_train(const RunConfig& config, std::ostream& log);
void cmd_eval(const RunConfig& config, std::ostream& log);
void cmd_ablate(const RunConfig& config, std::ostream& log);
void cmd_sweep(const RunConfig& config, std::ostream& log);
void cmd_analyze(const RunConfig& config, std::ostream& log);

const std::vector<std::string>& command_names();

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kDivergence = 3 };

// Dispatches by name and maps exceptions to exit codes, printing the
// message to `err`.
int run_command(const std::string& name, const RunConfig& config, std::ostream& log, std::ostream& err);

// argv-level entry point (flags, --config, subcommand).
int main_entry(int argc, char** argv);

}  // namespace sadsp::cli
