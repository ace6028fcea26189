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

#ifndef DELTACHECK_GENERATION_HPP_
#define DELTACHECK_GENERATION_HPP_

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "deltacheck/assertion_engine.hpp"
#include "deltacheck/candidates.hpp"
#include "deltacheck/prompt_history.hpp"
#include "deltacheck/taxonomy.hpp"

namespace deltacheck {

class LlmGateway;

// A natural-language check proposed for one prompt delta.
struct CriterionConcept {
  std::string description;
  DeltaCategory category;
  std::string source;  // phrase of the delta that triggered the concept
  int delta_version = 0;
  // True when `source` is not a substring of any sentence in the delta.
  bool unsourced = false;
};

struct DeltaOutcome {
  int delta_version = 0;
  std::size_t concepts = 0;
  std::size_t candidates = 0;
  std::size_t skipped_specs = 0;
  std::string error_kind;  // empty on success
  std::string error;

  bool ok() const { return error_kind.empty(); }
};

struct GenerationReport {
  std::vector<DeltaOutcome> deltas;
  std::vector<std::string> warnings;
};

// The first ```json fenced block, or failing that the first balanced
// top-level JSON array or object in `text`. Throws GenerationParseError.
nlohmann::json parse_fenced_json(std::string_view text);

std::string render_categorize_prompt(const PromptDelta& delta);

std::string render_synthesis_prompt(const std::vector<CriterionConcept>& concepts,
                                    const PromptTemplate& final_prompt,
                                    const ExampleRun& sample);

// Asks the model for assertion concepts covering `delta`. Throws
// PreconditionError for an empty delta and GenerationParseError when neither
// the reply nor one reformatted reply holds a JSON list.
std::vector<CriterionConcept> categorize_delta(const PromptDelta& delta, LlmGateway& gateway);

// Turns concepts into DSL assertions with ids a<version>_<ordinal>_<slug>.
// Invalid specs are skipped with a warning. Throws GenerationParseError (no
// parseable reply after one retry) or EmptyCandidateSetError (nothing valid).
std::vector<Candidate> synthesize_assertions(const std::vector<CriterionConcept>& concepts,
                                             const PromptTemplate& final_prompt,
                                             const ExampleRun& sample, LlmGateway& gateway,
                                             std::vector<std::string>* warnings = nullptr);

// Categorize + synthesize for every delta 1..k. A failing delta is skipped and
// recorded in `report`; AuthError and PreconditionError still propagate.
// Candidates are ordered by (delta version, ordinal) for any `threads`.
// Throws EmptyCandidateSetError when no delta yields a candidate.
CandidateSet generate_candidates(const PromptVersionHistory& history, const ExampleRun& sample,
                                 LlmGateway& gateway, GenerationReport* report = nullptr,
                                 unsigned threads = 1);

}  // namespace deltacheck

#endif  // DELTACHECK_GENERATION_HPP_
