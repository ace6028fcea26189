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

#ifndef DELTACHECK_SELECTION_HPP_
#define DELTACHECK_SELECTION_HPP_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deltacheck/assertion_engine.hpp"
#include "deltacheck/subsumption.hpp"

namespace deltacheck {

enum class SelectionMode { kCov, kSub, kBaseline, kNoExamples };
enum class SelectionStatus { kOptimal, kInfeasible, kTimeLimit };

std::string_view to_string(SelectionMode mode);      // "cov", "sub", "baseline", "no-examples"
std::string_view to_string(SelectionStatus status);  // "OPTIMAL", ...
SelectionMode parse_selection_mode(std::string_view name);
SelectionStatus parse_selection_status(std::string_view name);

struct SelectionConfig {
  double alpha = 0.6;
  double tau = 0.25;
  SelectionMode mode = SelectionMode::kSub;
  std::chrono::duration<double> time_limit{60.0};

  // Throws ValidationError for thresholds outside [0, 1] or a non-positive
  // time limit.
  void validate() const;
};

// One value per ILP variable for a fixed choice of x. Rows of `w` follow
// the examples, everything indexed by assertion follows the matrix columns.
// u and z are 0 for GOOD and BAD examples respectively.
struct IlpAssignment {
  std::vector<std::uint8_t> x;
  std::vector<std::vector<std::uint8_t>> w;
  std::vector<std::uint8_t> u;
  std::vector<std::uint8_t> z;
  std::vector<std::uint8_t> r;
  std::vector<std::uint8_t> s;

  friend bool operator==(const IlpAssignment&, const IlpAssignment&) = default;
};

struct SelectionResult {
  SelectionMode mode = SelectionMode::kSub;
  double alpha = 0.0;
  double tau = 0.0;
  SelectionStatus status = SelectionStatus::kOptimal;
  std::vector<std::string> selected_ids;               // sorted
  std::vector<std::string> excluded_not_subsumed_ids;  // sorted
  std::optional<double> coverage;                      // unset without examples
  std::optional<double> ffr;
  std::int64_t objective = 0;
  std::optional<double> max_coverage_at_tau;  // set on infeasibility

  // Not serialized.
  IlpAssignment ilp;  // the solver's own values, empty for no-examples mode
  std::uint64_t nodes = 0;
};

nlohmann::json selection_to_json(const SelectionResult& result);
SelectionResult selection_from_json(const nlohmann::json& doc);
SelectionResult load_selection(const std::filesystem::path& path);

// Minimum |F'| with Coverage(F') >= alpha and FFR(F') <= tau.
SelectionResult solve_cov(const ResultMatrix& m, std::span<const Label> labels, double alpha,
                          double tau,
                          std::chrono::duration<double> time_limit = std::chrono::seconds(60));

// Minimum |F'| + |G| under the same constraints, where G holds the
// unselected assertions no selected assertion implies according to `k`.
SelectionResult solve_sub(const ResultMatrix& m, std::span<const Label> labels,
                          const SubsumptionMatrix& k, double alpha, double tau,
                          std::chrono::duration<double> time_limit = std::chrono::seconds(60));

// Every assertion whose own FFR is at most tau. `k` only feeds G.
SelectionResult solve_baseline(const ResultMatrix& m, std::span<const Label> labels, double tau,
                               const SubsumptionMatrix* k = nullptr);

// One representative (smallest id) of every source component of the
// implication graph. Implication is transitive, so `k` is closed first.
SelectionResult solve_no_examples(const SubsumptionMatrix& k);

// Dispatches on config.mode. `m` may be null only in no-examples mode, `k`
// must be given for sub and no-examples modes.
SelectionResult solve(const SelectionConfig& config, const ResultMatrix* m,
                      std::span<const Label> labels, const SubsumptionMatrix* k);

// Exhaustive reference solver for tests. Modes cov, sub and no-examples.
// Throws TooLargeError for more than 20 assertions.
SelectionResult brute_force_oracle(const ResultMatrix& m, std::span<const Label> labels,
                                   const SubsumptionMatrix* k, double alpha, double tau,
                                   SelectionMode mode);

// Largest Coverage(F') over all F' with FFR(F') <= tau.
double max_coverage_at_tau(const ResultMatrix& m, std::span<const Label> labels, double tau);

// Unselected assertions that no selected assertion implies directly in `k`
// (identity when null). Sorted.
std::vector<std::string> excluded_not_subsumed(const std::vector<std::string>& all_ids,
                                               const std::vector<std::string>& selected,
                                               const SubsumptionMatrix* k);

// The ILP variables implied by selecting `selected`, from their definitions.
IlpAssignment derive_ilp_variables(const ResultMatrix& m, std::span<const Label> labels,
                                   const SubsumptionMatrix* k,
                                   const std::vector<std::string>& selected);

// Checks every constraint of the ILP (the subsumption block only when `k` is
// given). On failure returns false and describes the first violation.
bool check_ilp_constraints(const ResultMatrix& m, std::span<const Label> labels,
                           const SubsumptionMatrix* k, double alpha, double tau,
                           const IlpAssignment& a, std::string* violation = nullptr);

}  // namespace deltacheck

#endif  // DELTACHECK_SELECTION_HPP_
