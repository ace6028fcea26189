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

#ifndef DELTACHECK_ASSERTION_ENGINE_HPP_
#define DELTACHECK_ASSERTION_ENGINE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deltacheck/assertion_spec.hpp"
#include "deltacheck/candidates.hpp"

namespace deltacheck {

class LlmGateway;

// GOOD = the developer accepts the response, BAD = a failure.
enum class Label : std::uint8_t { kBad = 0, kGood = 1 };

struct ExampleRun {
  std::string id;
  std::map<std::string, std::string> input;
  std::string formatted_prompt;
  std::string response;
  Label label = Label::kGood;
};

struct ExampleSet {
  std::vector<ExampleRun> examples;

  std::size_t size() const { return examples.size(); }
  std::vector<Label> labels() const;
  std::vector<std::string> ids() const;
  // Throws ValidationError for an empty set, duplicate ids or an empty
  // formatted prompt.
  void validate() const;
  // First GOOD example, or the first example when none is GOOD.
  const ExampleRun& sample() const;
};

nlohmann::json examples_to_json(const ExampleSet& set);
ExampleSet examples_from_json(const nlohmann::json& doc);
ExampleSet load_examples(const std::filesystem::path& path);

// n x m pass/fail table: cell(i, j) == 1 iff assertion j passes example i.
struct ResultMatrix {
  std::vector<std::string> example_ids;
  std::vector<std::string> assertion_ids;
  std::vector<std::vector<std::uint8_t>> cells;

  std::size_t rows() const { return example_ids.size(); }
  std::size_t cols() const { return assertion_ids.size(); }
  bool passes(std::size_t example, std::size_t assertion) const {
    return cells[example][assertion] != 0;
  }
  // Throws UnknownAssertionError.
  std::size_t assertion_index(const std::string& id) const;
  std::vector<std::size_t> assertion_indices(const std::set<std::string>& ids) const;
  void validate() const;
};

nlohmann::json matrix_to_json(const ResultMatrix& m);
ResultMatrix matrix_from_json(const nlohmann::json& doc);
ResultMatrix load_matrix(const std::filesystem::path& path);

struct EvaluationError {
  std::string assertion_id;
  std::string example_id;
  std::string kind;
  std::string message;
};

// Thread-safe sink for evaluation failures. Entries are reported sorted by
// (assertion, example) so that logs are independent of thread scheduling.
class EvaluationLog {
 public:
  void record(EvaluationError error);
  std::vector<EvaluationError> entries() const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::vector<EvaluationError> entries_;
};

// Runs one assertion on one example. Every failure inside the evaluation
// (missing field, bad regex, gateway error, ambiguous model reply) counts as
// a failed assertion and is written to `log` when given. `gateway` may be
// null, in which case llm_question assertions fail.
bool evaluate_assertion(const AssertionSpec& spec, const ExampleRun& example,
                        LlmGateway* gateway, EvaluationLog* log = nullptr);

// Rows follow `examples`, columns follow `candidates`. Cells are evaluated on
// `threads` worker threads; the result does not depend on the thread count.
ResultMatrix build_result_matrix(const CandidateSet& candidates, const ExampleSet& examples,
                                 LlmGateway* gateway, EvaluationLog* log = nullptr,
                                 unsigned threads = 1);

// Fraction of BAD examples flagged by the conjunction of `selected`; 1 when
// there are no BAD examples.
double set_coverage(const ResultMatrix& m, std::span<const Label> labels,
                    const std::set<std::string>& selected);

// Fraction of GOOD examples flagged by the conjunction of `selected`; 0 when
// there are no GOOD examples.
double set_ffr(const ResultMatrix& m, std::span<const Label> labels,
               const std::set<std::string>& selected);

double single_ffr(const ResultMatrix& m, std::span<const Label> labels,
                  const std::string& assertion_id);

}  // namespace deltacheck

#endif  // DELTACHECK_ASSERTION_ENGINE_HPP_
