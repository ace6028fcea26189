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

#include "deltacheck/run_report.hpp"

#include <cmath>
#include <set>

namespace deltacheck {
namespace {

using json = nlohmann::json;

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

bool close(std::optional<double> a, std::optional<double> b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || std::fabs(*a - *b) <= 1e-9;
}

}  // namespace

SelectionMetrics selection_metrics(const SelectionResult& result, std::size_t candidate_count) {
  SelectionMetrics m;
  m.mode = result.mode;
  m.status = result.status;
  if (candidate_count > 0) {
    const double total = static_cast<double>(candidate_count);
    m.fraction_selected = static_cast<double>(result.selected_ids.size()) / total;
    m.fraction_excluded_not_subsumed =
        static_cast<double>(result.excluded_not_subsumed_ids.size()) / total;
  }
  m.ffr = result.ffr;
  m.coverage = result.coverage;
  return m;
}

json run_report_to_json(const RunReport& report) {
  json doc;
  doc["timings"] = json::array();
  for (const auto& t : report.timings) {
    doc["timings"].push_back({{"stage", t.stage}, {"seconds", t.seconds}, {"reused", t.reused}});
  }
  if (report.generation) {
    json deltas = json::array();
    for (const auto& d : report.generation->deltas) {
      deltas.push_back({{"version", d.delta_version},
                        {"concepts", d.concepts},
                        {"candidates", d.candidates},
                        {"skipped_specs", d.skipped_specs},
                        {"error_kind", d.ok() ? json(nullptr) : json(d.error_kind)},
                        {"error", d.ok() ? json(nullptr) : json(d.error)}});
    }
    doc["generation"] = {{"deltas", deltas}, {"warnings", report.generation->warnings}};
  }
  doc["evaluation_errors"] = json::array();
  for (const auto& e : report.evaluation_errors) {
    doc["evaluation_errors"].push_back({{"assertion_id", e.assertion_id},
                                        {"example_id", e.example_id},
                                        {"kind", e.kind},
                                        {"message", e.message}});
  }
  if (report.subsumption) {
    const auto& s = *report.subsumption;
    auto pairs = [](const std::vector<PairRecord>& v) {
      json out = json::array();
      for (const auto& p : v) {
        json item = {{"from", p.from}, {"to", p.to}};
        if (!p.witness_example.empty()) item["witness_example"] = p.witness_example;
        out.push_back(item);
      }
      return out;
    };
    doc["subsumption"] = {{"rule_pairs", s.dsl_pairs},
                          {"llm_proposed", pairs(s.llm_proposed)},
                          {"refuted", pairs(s.refuted)},
                          {"alarms", pairs(s.alarms)},
                          {"skipped_by_ffr", s.skipped},
                          {"llm_failure", s.llm_failure.empty() ? json(nullptr) : json(s.llm_failure)},
                          {"warnings", s.warnings},
                          {"provenance_counts", s.provenance_counts}};
  }
  doc["metrics"] = json::array();
  for (const auto& m : report.metrics) {
    doc["metrics"].push_back({{"mode", to_string(m.mode)},
                              {"status", to_string(m.status)},
                              {"fraction_selected", m.fraction_selected},
                              {"fraction_excluded_not_subsumed", m.fraction_excluded_not_subsumed},
                              {"ffr", opt(m.ffr)},
                              {"coverage", opt(m.coverage)}});
  }
  doc["consistency_problems"] = report.consistency_problems;
  return doc;
}

std::vector<std::string> check_selection_consistency(const SelectionResult& selection,
                                                     const ResultMatrix* m,
                                                     std::span<const Label> labels,
                                                     const SubsumptionMatrix* k) {
  std::vector<std::string> problems;
  if (selection.status == SelectionStatus::kInfeasible) {
    if (!selection.selected_ids.empty()) problems.push_back("infeasible result lists a selection");
    return problems;
  }
  const std::set<std::string> chosen(selection.selected_ids.begin(), selection.selected_ids.end());
  if (m != nullptr) {
    const double cov = set_coverage(*m, labels, chosen);
    const double ffr = set_ffr(*m, labels, chosen);
    if (!close(selection.coverage, cov)) problems.push_back("coverage differs from the matrix");
    if (!close(selection.ffr, ffr)) problems.push_back("FFR differs from the matrix");
    const bool constrained =
        selection.mode == SelectionMode::kCov || selection.mode == SelectionMode::kSub;
    if (constrained && selection.status == SelectionStatus::kOptimal &&
        (cov < selection.alpha - 1e-9 || ffr > selection.tau + 1e-9)) {
      problems.push_back("optimal selection violates its thresholds");
    }
  }
  std::vector<std::string> all_ids;
  if (m != nullptr) {
    all_ids = m->assertion_ids;
  } else if (k != nullptr) {
    all_ids = k->assertion_ids;
  }
  const SubsumptionMatrix* g_matrix = selection.mode == SelectionMode::kBaseline ||
                                              selection.mode == SelectionMode::kCov ||
                                              selection.mode == SelectionMode::kSub
                                          ? k
                                          : nullptr;
  SubsumptionMatrix closed;
  if (selection.mode == SelectionMode::kNoExamples && k != nullptr) {
    closed = *k;
    transitive_closure(closed);
    g_matrix = &closed;
  }
  if (!all_ids.empty() &&
      excluded_not_subsumed(all_ids, selection.selected_ids, g_matrix) !=
          selection.excluded_not_subsumed_ids) {
    problems.push_back("excluded_not_subsumed differs from the subsumption matrix");
  }
  const auto expected =
      static_cast<std::int64_t>(selection.selected_ids.size() +
                                (selection.mode == SelectionMode::kSub ||
                                         selection.mode == SelectionMode::kNoExamples
                                     ? selection.excluded_not_subsumed_ids.size()
                                     : 0));
  if (expected != selection.objective) problems.push_back("objective differs from the selection");
  return problems;
}

}  // namespace deltacheck
