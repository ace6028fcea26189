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

#include "cli/commands.hpp"

#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

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

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void require_file(const std::filesystem::path& path, const char* what) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw IoError(std::string(what) + " file not found: " + path.string());
  }
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

void write_report(const std::optional<std::filesystem::path>& path, const RunReport& report) {
  if (path) write_json_file(*path, run_report_to_json(report));
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const EmptyCandidateSetError*>(&e)) return kExitEmptyCandidates;
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
      dynamic_cast<const PreconditionError*>(&e) || dynamic_cast<const IoError*>(&e) ||
      dynamic_cast<const UnknownAssertionError*>(&e) ||
      dynamic_cast<const GenerationParseError*>(&e)) {
    return kExitUsage;
  }
  return kExitInternal;
}

GatewayConfig gateway_config(const GatewayOptions& options) {
  GatewayConfig config = GatewayConfig::from_env();
  if (options.mode) config.mode = parse_gateway_mode(*options.mode);
  if (options.cache_dir) config.cache_dir = *options.cache_dir;
  return config;
}

std::vector<Label> labels_for(const ResultMatrix& m, const ExampleSet& examples) {
  std::map<std::string, Label> by_id;
  for (const auto& e : examples.examples) by_id[e.id] = e.label;
  std::vector<Label> labels;
  for (const auto& id : m.example_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw DimensionMismatchError("matrix row '" + id + "' has no example in the examples file");
    }
    labels.push_back(it->second);
  }
  return labels;
}

std::string format_metrics(const SelectionResult& r, std::size_t candidate_count) {
  const SelectionMetrics m = selection_metrics(r, candidate_count);
  const std::string total = std::to_string(candidate_count);
  std::string s;
  s += "selected " + std::to_string(r.selected_ids.size()) + "/" + total + " (" +
       fixed(m.fraction_selected) + ")\n";
  s += "excluded not subsumed " + std::to_string(r.excluded_not_subsumed_ids.size()) + "/" +
       total + " (" + fixed(m.fraction_excluded_not_subsumed) + ")\n";
  s += "ffr " + (m.ffr ? fixed(*m.ffr) : std::string("n/a")) + "\n";
  s += "coverage " + (m.coverage ? fixed(*m.coverage) : std::string("n/a")) + "\n";
  return s;
}

int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_file(args.history, "history");
    require_file(args.examples, "examples");
    const auto history = load_history(args.history);
    const auto examples = load_examples(args.examples);
    examples.validate();
    LlmGateway gateway(gateway_config(args.gateway));

    RunReport report;
    report.generation.emplace();
    CandidateSet set;
    try {
      set = generate_candidates(history, examples.sample(), gateway, &*report.generation,
                                args.threads);
    } catch (const EmptyCandidateSetError&) {
      for (const auto& d : report.generation->deltas) {
        if (!d.ok()) err << "delta " << d.delta_version << ": " << d.error_kind << ": " << d.error << "\n";
      }
      write_report(args.report, report);
      throw;
    }
    write_json_file(args.out, candidates_to_json(set));
    write_report(args.report, report);
    for (const auto& w : report.generation->warnings) err << "warning: " << w << "\n";

    std::map<CategoryName, std::size_t> tally;
    for (const auto& c : set.candidates) ++tally[c.category];
    out << set.size() << " candidate assertions\n";
    for (const auto& [category, count] : tally) out << "  " << to_string(category) << " " << count << "\n";
    return kExitOk;
  });
}

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_file(args.candidates, "candidates");
    require_file(args.examples, "examples");
    const auto candidates = load_candidates(args.candidates);
    const auto examples = load_examples(args.examples);
    candidates.validate();
    examples.validate();
    if (candidates.empty()) throw ValidationError("the candidate file holds no assertions");
    LlmGateway gateway(gateway_config(args.gateway));
    EvaluationLog log;
    const auto m = build_result_matrix(candidates, examples, &gateway, &log, args.threads);
    write_json_file(args.out, matrix_to_json(m));

    RunReport report;
    report.evaluation_errors = log.entries();
    write_report(args.report, report);
    if (log.size() > 0) err << "warning: " << log.size() << " evaluation errors counted as failures\n";

    const auto labels = examples.labels();
    out << "n=" << m.rows() << " m=" << m.cols() << "\n";
    for (const auto& id : m.assertion_ids) {
      out << "  " << id << " ffr=" << fixed(single_ffr(m, labels, id)) << "\n";
    }
    return kExitOk;
  });
}

int cmd_subsume(const SubsumeArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!(args.tau >= 0.0 && args.tau <= 1.0)) throw ValidationError("tau must lie in [0, 1]");
    require_file(args.candidates, "candidates");
    require_file(args.matrix, "matrix");
    require_file(args.examples, "examples");
    const auto candidates = load_candidates(args.candidates);
    const auto m = load_matrix(args.matrix);
    const auto examples = load_examples(args.examples);
    const auto labels = labels_for(m, examples);
    LlmGateway gateway(gateway_config(args.gateway));

    RunReport report;
    report.subsumption.emplace();
    const auto k =
        build_subsumption_matrix(candidates, m, labels, args.tau, &gateway, &*report.subsumption);
    write_json_file(args.out, subsumption_to_json(k));
    write_report(args.report, report);

    const auto& rep = *report.subsumption;
    if (!rep.llm_failure.empty()) err << "warning: rule pairs only: " << rep.llm_failure << "\n";
    for (const auto& a : rep.alarms) {
      err << "alarm: rule pair " << a.from << " -> " << a.to << " contradicted by example "
          << a.witness_example << "\n";
    }
    for (const auto& r : rep.refuted) {
      out << "refuted " << r.from << " -> " << r.to << " by example " << r.witness_example << "\n";
    }
    for (const char* p : {"DSL_RULE", "LLM", "TRANSITIVE"}) {
      auto it = rep.provenance_counts.find(p);
      out << p << " " << (it == rep.provenance_counts.end() ? 0 : it->second) << "\n";
    }
    return kExitOk;
  });
}

int cmd_select(const SelectArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    args.config.validate();
    const SelectionMode mode = args.config.mode;
    if ((mode == SelectionMode::kSub || mode == SelectionMode::kNoExamples) && !args.subsumption) {
      throw ValidationError(std::string("--subsumption is required in ") +
                            std::string(to_string(mode)) + " mode");
    }
    if (mode != SelectionMode::kNoExamples && !args.matrix) {
      throw ValidationError(std::string("--matrix is required in ") + std::string(to_string(mode)) +
                            " mode");
    }
    if (args.matrix && !args.examples) {
      throw ValidationError("--examples is required with --matrix (it supplies the labels)");
    }
    std::optional<ResultMatrix> m;
    std::vector<Label> labels;
    if (args.matrix) {
      require_file(*args.matrix, "matrix");
      require_file(*args.examples, "examples");
      m = load_matrix(*args.matrix);
      labels = labels_for(*m, load_examples(*args.examples));
    }
    std::optional<SubsumptionMatrix> k;
    if (args.subsumption) {
      require_file(*args.subsumption, "subsumption");
      k = load_subsumption(*args.subsumption);
    }
    const auto result = solve(args.config, m ? &*m : nullptr, labels, k ? &*k : nullptr);
    write_json_file(args.out, selection_to_json(result));

    const std::size_t total = m ? m->cols() : k->size();
    out << "status " << to_string(result.status) << "\n";
    if (result.status == SelectionStatus::kInfeasible) {
      err << "infeasible: no selection reaches coverage " << fixed(args.config.alpha)
          << " with FFR at most " << fixed(args.config.tau) << "\n"
          << "max coverage at this tau: " << fixed(result.max_coverage_at_tau.value_or(0.0)) << "\n"
          << "hint: lower alpha or raise tau, halving the gap each try (binary search)\n";
      return kExitInfeasible;
    }
    out << format_metrics(result, total);
    out << "objective " << result.objective << "\n";
    if (result.status == SelectionStatus::kTimeLimit) {
      err << "time limit reached; the selection shown is the best found, not proven optimal\n";
      return kExitTimeLimit;
    }
    return kExitOk;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"deltacheck: select assertions for LLM pipelines from prompt version history"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->capture_default_str();

  GatewayOptions gateway;
  auto add_gateway = [&](CLI::App* sub) {
    sub->add_option("--gateway", gateway.mode, "LLM gateway mode: live, record, replay or off");
    sub->add_option("--cache-dir", gateway.cache_dir, "response cache directory");
  };
  const std::vector<std::string> modes = {"cov", "sub", "baseline", "no-examples"};

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "propose candidate assertions from prompt deltas");
  g->add_option("--history", gen.history, "prompt version history (JSON)")->required();
  g->add_option("--examples", gen.examples, "labeled examples (JSON)")->required();
  g->add_option("--out", gen.out, "candidate file to write")->required();
  g->add_option("--report", gen.report, "generation report to write");
  g->add_option("--threads", gen.threads, "worker threads")->capture_default_str();
  add_gateway(g);

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "run every candidate on every example");
  e->add_option("--candidates", ev.candidates)->required();
  e->add_option("--examples", ev.examples)->required();
  e->add_option("--out", ev.out, "result matrix to write")->required();
  e->add_option("--report", ev.report, "evaluation error log to write");
  e->add_option("--threads", ev.threads)->capture_default_str();
  add_gateway(e);

  SubsumeArgs su;
  auto* s = app.add_subcommand("subsume", "build the subsumption matrix");
  s->add_option("--candidates", su.candidates)->required();
  s->add_option("--matrix", su.matrix)->required();
  s->add_option("--examples", su.examples)->required();
  s->add_option("--tau", su.tau)->capture_default_str();
  s->add_option("--out", su.out, "subsumption file to write")->required();
  s->add_option("--report", su.report, "subsumption report to write");
  add_gateway(s);

  SelectArgs se;
  std::string mode = "sub";
  double alpha = se.config.alpha, tau = se.config.tau, time_limit = se.config.time_limit.count();
  auto* c = app.add_subcommand("select", "choose a minimal assertion set");
  c->add_option("--matrix", se.matrix);
  c->add_option("--examples", se.examples, "labels for the matrix rows");
  c->add_option("--subsumption", se.subsumption);
  c->add_option("--alpha", alpha, "coverage threshold")->capture_default_str();
  c->add_option("--tau", tau, "FFR threshold")->capture_default_str();
  c->add_option("--mode", mode)->check(CLI::IsMember(modes))->capture_default_str();
  c->add_option("--time-limit", time_limit, "seconds")->capture_default_str();
  c->add_option("--out", se.out, "selection file to write")->required();

  std::filesystem::path config;
  std::optional<unsigned> run_threads;
  auto* r = app.add_subcommand("run", "generate, evaluate, subsume and select from a config file");
  r->add_option("config", config, "run configuration (JSON)")->required();
  r->add_option("--threads", run_threads, "overrides the config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  spdlog::set_level(spdlog::level::from_str(log_level));
  if (!spdlog::get("deltacheck")) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("deltacheck"));
    spdlog::set_level(spdlog::level::from_str(log_level));
  }

  if (g->parsed()) {
    gen.gateway = gateway;
    return cmd_generate(gen, out, err);
  }
  if (e->parsed()) {
    ev.gateway = gateway;
    return cmd_evaluate(ev, out, err);
  }
  if (s->parsed()) {
    su.gateway = gateway;
    return cmd_subsume(su, out, err);
  }
  if (c->parsed()) {
    return guarded(err, [&] {
      se.config.mode = parse_selection_mode(mode);
      se.config.alpha = alpha;
      se.config.tau = tau;
      se.config.time_limit = std::chrono::duration<double>(time_limit);
      return cmd_select(se, out, err);
    });
  }
  return cmd_run(config, out, err, run_threads);
}

}  // namespace deltacheck::cli
