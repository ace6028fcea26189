// Copyright 2026 The Deltacheck Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DELTACHECK_TOOLS_CLI_COMMANDS_HPP_
#define DELTACHECK_TOOLS_CLI_COMMANDS_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "deltacheck/llm_gateway.hpp"
#include "deltacheck/selection.hpp"

namespace deltacheck::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;  // also parse and validation errors
inline constexpr int kExitEmptyCandidates = 3;
inline constexpr int kExitInfeasible = 4;
inline constexpr int kExitTimeLimit = 5;

// Gateway overrides on top of the environment.
struct GatewayOptions {
  std::optional<std::string> mode;
  std::optional<std::filesystem::path> cache_dir;
};

struct GenerateArgs {
  std::filesystem::path history;
  std::filesystem::path examples;
  std::filesystem::path out;
  std::optional<std::filesystem::path> report;
  unsigned threads = 1;
  GatewayOptions gateway;
};

struct EvaluateArgs {
  std::filesystem::path candidates;
  std::filesystem::path examples;
  std::filesystem::path out;
  std::optional<std::filesystem::path> report;
  unsigned threads = 1;
  GatewayOptions gateway;
};

struct SubsumeArgs {
  std::filesystem::path candidates;
  std::filesystem::path matrix;
  std::filesystem::path examples;
  double tau = 0.25;
  std::filesystem::path out;
  std::optional<std::filesystem::path> report;
  GatewayOptions gateway;
};

struct SelectArgs {
  std::optional<std::filesystem::path> matrix;
  std::optional<std::filesystem::path> examples;
  std::optional<std::filesystem::path> subsumption;
  SelectionConfig config;
  std::filesystem::path out;
};

int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err);
int cmd_evaluate(const EvaluateArgs& args, std::ostream& out, std::ostream& err);
int cmd_subsume(const SubsumeArgs& args, std::ostream& out, std::ostream& err);
int cmd_select(const SelectArgs& args, std::ostream& out, std::ostream& err);

// Full pipeline driven by a JSON config; `threads` overrides the config.
int cmd_run(const std::filesystem::path& config, std::ostream& out, std::ostream& err,
            std::optional<unsigned> threads = std::nullopt);

// Parses argv and dispatches. Never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Shared helpers.
int exit_code_for(const std::exception& e);
GatewayConfig gateway_config(const GatewayOptions& options);
std::vector<Label> labels_for(const ResultMatrix& m, const ExampleSet& examples);
std::string format_metrics(const SelectionResult& result, std::size_t candidate_count);

}  // namespace deltacheck::cli

#endif  // DELTACHECK_TOOLS_CLI_COMMANDS_HPP_
