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

// The `run` command: every stage in sequence with file artifacts in one
// output directory. run_state.json records a fingerprint of each finished
// stage's inputs and the hash of its output, so a rerun reuses them.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "cli/commands.hpp"
#include "deltacheck/assertion_engine.hpp"
#include "deltacheck/candidates.hpp"
#include "deltacheck/errors.hpp"
#include "deltacheck/generation.hpp"
#include "deltacheck/json_io.hpp"
#include "deltacheck/prompt_history.hpp"
#include "deltacheck/run_report.hpp"
#include "deltacheck/subsumption.hpp"

namespace deltacheck::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct RunConfig {
  fs::path history;
  fs::path examples;
  fs::path out_dir;
  std::optional<fs::path> candidates;
  std::optional<fs::path> matrix;
  std::optional<fs::path> subsumption;
  SelectionConfig selection;
  unsigned threads = 1;
  GatewayConfig gateway;
  fs::path report;
};

RunConfig load_run_config(const fs::path& path) {
  static const std::set<std::string> kKeys = {
      "history", "examples", "out_dir", "candidates", "matrix", "subsumption", "mode",
      "alpha",   "tau",      "time_limit", "threads", "gateway", "report"};
  const json doc = read_json_file(path);
  if (!doc.is_object()) throw ValidationError("run config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!kKeys.count(key)) throw ValidationError("unknown run config key '" + key + "'");
  }
  const fs::path base = path.parent_path();
  auto resolve = [&](const json& v, const char* key) {
    if (!v.is_string()) throw ValidationError(std::string(key) + " must be a path string");
    fs::path p = v.get<std::string>();
    return p.is_absolute() ? p : base / p;
  };
  auto required = [&](const char* key) {
    if (!doc.contains(key)) throw ValidationError(std::string("run config needs '") + key + "'");
    return resolve(doc[key], key);
  };
  auto optional_path = [&](const char* key) -> std::optional<fs::path> {
    if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
    return resolve(doc[key], key);
  };

  RunConfig c;
  c.history = required("history");
  c.examples = required("examples");
  c.out_dir = required("out_dir");
  c.candidates = optional_path("candidates");
  c.matrix = optional_path("matrix");
  c.subsumption = optional_path("subsumption");
  try {
    if (doc.contains("mode")) c.selection.mode = parse_selection_mode(doc["mode"].get<std::string>());
    if (doc.contains("alpha")) c.selection.alpha = doc["alpha"].get<double>();
    if (doc.contains("tau")) c.selection.tau = doc["tau"].get<double>();
    if (doc.contains("time_limit")) {
      c.selection.time_limit = std::chrono::duration<double>(doc["time_limit"].get<double>());
    }
    if (doc.contains("threads")) c.threads = doc["threads"].get<unsigned>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("run config: ") + e.what());
  }
  c.selection.validate();

  c.gateway = GatewayConfig::from_env();
  if (doc.contains("gateway")) {
    const json& g = doc["gateway"];
    if (!g.is_object()) throw ValidationError("gateway must be an object");
    for (const auto& [key, value] : g.items()) {
      if (key == "mode") {
        c.gateway.mode = parse_gateway_mode(value.get<std::string>());
      } else if (key == "cache_dir") {
        c.gateway.cache_dir = resolve(value, "gateway.cache_dir");
      } else if (key == "endpoint") {
        c.gateway.endpoint = value.get<std::string>();
      } else if (key == "model") {
        c.gateway.model = value.get<std::string>();
      } else {
        throw ValidationError("unknown gateway key '" + key + "'");
      }
    }
  }
  c.report = doc.contains("report") ? resolve(doc["report"], "report") : c.out_dir / "report.json";
  return c;
}

std::optional<std::string> file_sha(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

std::string must_sha(const fs::path& path) {
  auto sha = file_sha(path);
  if (!sha) throw IoError("cannot read " + path.string());
  return *sha;
}

class RunState {
 public:
  explicit RunState(fs::path path) : path_(std::move(path)) {
    std::error_code ec;
    if (fs::exists(path_, ec)) {
      try {
        doc_ = read_json_file(path_);
      } catch (const Error& e) {
        spdlog::warn("ignoring unreadable run state: {}", e.what());
      }
    }
    if (!doc_.is_object() || !doc_.contains("stages") || !doc_["stages"].is_object()) {
      doc_ = {{"stages", json::object()}};
    }
  }

  bool reusable(const std::string& stage, const std::string& fingerprint,
                const fs::path& output) const {
    const json& s = doc_["stages"];
    if (!s.contains(stage)) return false;
    const auto sha = file_sha(output);
    return sha && s[stage].value("fingerprint", "") == fingerprint &&
           s[stage].value("output_sha256", "") == *sha;
  }

  void record(const std::string& stage, const std::string& fingerprint, const fs::path& output) {
    doc_["stages"][stage] = {{"fingerprint", fingerprint}, {"output_sha256", must_sha(output)}};
    write_json_file(path_, doc_);
  }

 private:
  fs::path path_;
  json doc_;
};

std::string fingerprint(std::initializer_list<std::string> parts) {
  return sha256_hex(json(std::vector<std::string>(parts)).dump());
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int run_pipeline(const fs::path& config_path, std::ostream& out, std::ostream& err,
                 std::optional<unsigned> threads_override) {
  const RunConfig config = load_run_config(config_path);
  const unsigned threads = threads_override.value_or(config.threads);
  for (const auto& [path, what] : {std::pair{config.history, "history"},
                                   std::pair{config.examples, "examples"}}) {
    if (!fs::is_regular_file(path)) throw IoError(std::string(what) + " file not found: " + path.string());
  }
  for (const auto& p : {config.candidates, config.matrix, config.subsumption}) {
    if (p && !fs::is_regular_file(*p)) throw IoError("input file not found: " + p->string());
  }
  fs::create_directories(config.out_dir);

  const auto history = load_history(config.history);
  const auto examples = load_examples(config.examples);
  examples.validate();
  LlmGateway gateway(config.gateway);
  RunState state(config.out_dir / "run_state.json");
  RunReport report;
  const std::string examples_sha = must_sha(config.examples);

  // Runs `produce` unless the recorded fingerprint and output still match.
  auto stage = [&](const std::string& name, const std::string& fp, const fs::path& output,
                   const std::function<void()>& produce) {
    const auto start = std::chrono::steady_clock::now();
    const bool reuse = state.reusable(name, fp, output);
    if (!reuse) {
      produce();
      state.record(name, fp, output);
    }
    report.timings.push_back({name, seconds_since(start), reuse});
    out << name << (reuse ? " (reused)" : "") << "\n";
  };

  // 1. candidates
  const fs::path candidates_path = config.candidates.value_or(config.out_dir / "candidates.json");
  if (config.candidates) {
    report.timings.push_back({"generate", 0.0, true});
  } else {
    stage("generate", fingerprint({"generate", must_sha(config.history), examples_sha}),
          candidates_path, [&] {
            report.generation.emplace();
            try {
              const auto set = generate_candidates(history, examples.sample(), gateway,
                                                   &*report.generation, threads);
              write_json_file(candidates_path, candidates_to_json(set));
            } catch (const EmptyCandidateSetError&) {
              for (const auto& d : report.generation->deltas) {
                if (!d.ok()) {
                  err << "delta " << d.delta_version << ": " << d.error_kind << ": " << d.error << "\n";
                }
              }
              write_json_file(config.report, run_report_to_json(report));
              throw;
            }
          });
  }
  const auto candidates = load_candidates(candidates_path);
  candidates.validate();

  // 2. result matrix
  const fs::path matrix_path = config.matrix.value_or(config.out_dir / "matrix.json");
  if (config.matrix) {
    report.timings.push_back({"evaluate", 0.0, true});
  } else {
    stage("evaluate", fingerprint({"evaluate", must_sha(candidates_path), examples_sha}),
          matrix_path, [&] {
            EvaluationLog log;
            const auto m = build_result_matrix(candidates, examples, &gateway, &log, threads);
            report.evaluation_errors = log.entries();
            write_json_file(matrix_path, matrix_to_json(m));
          });
  }
  const auto m = load_matrix(matrix_path);
  const auto labels = labels_for(m, examples);

  // 3. subsumption
  char tau_text[32];
  std::snprintf(tau_text, sizeof tau_text, "%.9f", config.selection.tau);
  const fs::path k_path = config.subsumption.value_or(config.out_dir / "subsumption.json");
  if (config.subsumption) {
    report.timings.push_back({"subsume", 0.0, true});
  } else {
    stage("subsume",
          fingerprint({"subsume", must_sha(candidates_path), must_sha(matrix_path), examples_sha,
                       tau_text}),
          k_path, [&] {
            report.subsumption.emplace();
            const auto k = build_subsumption_matrix(candidates, m, labels, config.selection.tau,
                                                    &gateway, &*report.subsumption);
            write_json_file(k_path, subsumption_to_json(k));
          });
  }
  const auto k = load_subsumption(k_path);

  // 4. selection, always recomputed
  const fs::path selection_path = config.out_dir / "selection.json";
  const auto start = std::chrono::steady_clock::now();
  const auto result = solve(config.selection, &m, labels, &k);
  write_json_file(selection_path, selection_to_json(result));
  report.timings.push_back({"select", seconds_since(start), false});
  report.metrics.push_back(selection_metrics(result, m.cols()));

  // Self-consistency: artifacts round-trip and the metrics recompute.
  auto& problems = report.consistency_problems;
  if (read_json_file(candidates_path) != candidates_to_json(load_candidates(candidates_path))) {
    problems.push_back("candidate file does not round-trip");
  }
  if (read_json_file(matrix_path) != matrix_to_json(m)) problems.push_back("matrix file does not round-trip");
  if (read_json_file(k_path) != subsumption_to_json(k)) problems.push_back("subsumption file does not round-trip");
  const auto reloaded = load_selection(selection_path);
  if (selection_to_json(reloaded) != selection_to_json(result)) {
    problems.push_back("selection file does not round-trip");
  }
  for (auto& p : check_selection_consistency(reloaded, &m, labels, &k)) problems.push_back(p);
  const auto recomputed = selection_metrics(reloaded, load_matrix(matrix_path).cols());
  const auto& reported = report.metrics.back();
  if (recomputed.fraction_selected != reported.fraction_selected ||
      recomputed.fraction_excluded_not_subsumed != reported.fraction_excluded_not_subsumed ||
      recomputed.ffr != reported.ffr || recomputed.coverage != reported.coverage) {
    problems.push_back("report metrics differ from the artifacts");
  }
  write_json_file(config.report, run_report_to_json(report));

  out << "status " << to_string(result.status) << "\n";
  if (!problems.empty()) {
    for (const auto& p : problems) err << "consistency: " << p << "\n";
    return kExitInternal;
  }
  if (result.status == SelectionStatus::kInfeasible) {
    err << "infeasible: max coverage at this tau is "
        << result.max_coverage_at_tau.value_or(0.0) << "\n";
    return kExitInfeasible;
  }
  out << format_metrics(result, m.cols());
  return result.status == SelectionStatus::kTimeLimit ? kExitTimeLimit : kExitOk;
}

}  // namespace

int cmd_run(const fs::path& config, std::ostream& out, std::ostream& err,
            std::optional<unsigned> threads) {
  try {
    return run_pipeline(config, out, err, threads);
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace deltacheck::cli
