// Copyright 2026 The SkimNet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "skimnet/cli/config.hpp"
#include "skimnet/evalbench/evalbench.hpp"

namespace skimnet::cli {

/// File layout of an output directory.
struct RunPaths {
  std::filesystem::path root;
  explicit RunPaths(std::filesystem::path dir) : root(std::move(dir)) {}
  std::filesystem::path split(const std::string& name) const { return root / "data" / (name + ".sknd"); }
  std::filesystem::path teacher() const { return root / "teacher.sknp"; }
  std::filesystem::path student() const { return root / "student.sknp"; }
  std::filesystem::path skimmer() const { return root / "skimmer.sknp"; }
  std::filesystem::path lstm_baseline() const { return root / "lstm_baseline.sknp"; }
  std::filesystem::path effective_config() const { return root / "effective_config.json"; }
};

/// Loads the config, applies the --seed and --out overrides and resolves.
ExperimentConfig resolve_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed,
                                const std::optional<std::filesystem::path>& out);

/// Creates the output directory and writes effective_config.json.
void prepare_output(const ExperimentConfig& cfg);

void cmd_gen(const ExperimentConfig& cfg, std::ostream& log);
void cmd_distill(const ExperimentConfig& cfg, std::ostream& log);
void cmd_trainskim(const ExperimentConfig& cfg, std::ostream& log);
std::vector<evalbench::EvalReport> cmd_eval(const ExperimentConfig& cfg, std::ostream& log);
/// Returns the CSV written to sweep_<axis>.csv.
std::string cmd_sweep(const ExperimentConfig& cfg, SweepAxis axis, std::ostream& log);
/// True when every module passes.
bool cmd_gradcheck(const ExperimentConfig& cfg, const std::vector<std::string>& modules, std::ostream& log);

/// `skimnet <command> --config <path> [--seed <u64>] [--out <dir>]`. Errors
/// are printed to `err` as a one-line JSON object; the return value is the
/// process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string error_json(const std::string& category, const std::string& message, int exit_code);

}  // namespace skimnet::cli
