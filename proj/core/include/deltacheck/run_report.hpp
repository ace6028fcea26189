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

#ifndef DELTACHECK_RUN_REPORT_HPP_
#define DELTACHECK_RUN_REPORT_HPP_

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deltacheck/assertion_engine.hpp"
#include "deltacheck/generation.hpp"
#include "deltacheck/selection.hpp"
#include "deltacheck/subsumption.hpp"

namespace deltacheck {

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
  bool reused = false;  // artifact taken from an earlier run
};

// The four reported quantities for one selection.
struct SelectionMetrics {
  SelectionMode mode = SelectionMode::kSub;
  SelectionStatus status = SelectionStatus::kOptimal;
  double fraction_selected = 0.0;
  double fraction_excluded_not_subsumed = 0.0;
  std::optional<double> ffr;
  std::optional<double> coverage;
};

SelectionMetrics selection_metrics(const SelectionResult& result, std::size_t candidate_count);

struct RunReport {
  std::vector<StageTiming> timings;
  std::optional<GenerationReport> generation;
  std::vector<EvaluationError> evaluation_errors;
  std::optional<SubsumptionReport> subsumption;
  std::vector<SelectionMetrics> metrics;
  std::vector<std::string> consistency_problems;
};

nlohmann::json run_report_to_json(const RunReport& report);

// Recomputes coverage, FFR, G and the objective of `selection` from the
// other artifacts. Returns one message per disagreement.
std::vector<std::string> check_selection_consistency(const SelectionResult& selection,
                                                     const ResultMatrix* m,
                                                     std::span<const Label> labels,
                                                     const SubsumptionMatrix* k);

}  // namespace deltacheck

#endif  // DELTACHECK_RUN_REPORT_HPP_
