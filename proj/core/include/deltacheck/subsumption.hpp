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

#ifndef DELTACHECK_SUBSUMPTION_HPP_
#define DELTACHECK_SUBSUMPTION_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "deltacheck/assertion_engine.hpp"
#include "deltacheck/assertion_spec.hpp"
#include "deltacheck/candidates.hpp"

namespace deltacheck {

class LlmGateway;

enum class Provenance { kDslRule, kLlm, kTransitive };

std::string_view to_string(Provenance p);  // "DSL_RULE", "LLM", "TRANSITIVE"
Provenance parse_provenance(std::string_view name);

// m x m implication table: cell(i, j) == 1 iff {f_i} implies f_j, i.e. f_j
// flags nothing that f_i does not also flag.
struct SubsumptionMatrix {
  std::vector<std::string> assertion_ids;
  std::vector<std::vector<std::uint8_t>> cells;
  // Off-diagonal set cells only. Hand-written files may omit it.
  std::map<std::pair<std::size_t, std::size_t>, Provenance> provenance;

  std::size_t size() const { return assertion_ids.size(); }
  bool implies(std::size_t i, std::size_t j) const { return cells[i][j] != 0; }
  std::size_t index(const std::string& id) const;  // throws UnknownAssertionError
  bool is_transitively_closed() const;
  // Square, binary, reflexive, unique ids. Throws ValidationError.
  void validate() const;
};

SubsumptionMatrix identity_subsumption(const std::vector<std::string>& ids);

nlohmann::json subsumption_to_json(const SubsumptionMatrix& k);
SubsumptionMatrix subsumption_from_json(const nlohmann::json& doc);
SubsumptionMatrix load_subsumption(const std::filesystem::path& path);

// Sound but incomplete structural implication between two DSL specs: true
// only when every response passing `a` also passes `b`.
bool dsl_subsumes(const AssertionSpec& a, const AssertionSpec& b);

// Functions rendered for the pair-listing prompt, one per candidate.
std::string render_assertion_blob(const CandidateSet& candidates);

// Two model calls: one listing implied pairs, one formatting them as JSON.
// Unknown ids and self-pairs are dropped with a warning. If the formatted
// reply cannot be parsed even after one retry the result is empty and
// `failure` (when given) holds the reason. Throws PreconditionError for
// fewer than two candidates.
std::vector<std::pair<std::string, std::string>> llm_subsumption_pairs(
    const CandidateSet& candidates, LlmGateway& gateway,
    std::vector<std::string>* warnings = nullptr, std::string* failure = nullptr);

// Row of `m` in which `i` passes and `j` fails, which disproves {i} => j.
std::optional<std::size_t> refutation_witness(const std::string& i, const std::string& j,
                                              const ResultMatrix& m);

// True iff some example refutes {i} => j. Throws UnknownAssertionError.
bool prune_pair_by_examples(const std::string& i, const std::string& j, const ResultMatrix& m);

// Assertions whose own FFR is at least `tau` (and non-zero); pairs touching
// them are not sent to the model.
std::set<std::string> ffr_skip_set(const ResultMatrix& m, std::span<const Label> labels,
                                   double tau);

// Warshall closure in place; new cells are marked TRANSITIVE.
void transitive_closure(SubsumptionMatrix& k);

struct PairRecord {
  std::string from;
  std::string to;
  std::string witness_example;  // empty unless refuted
};

struct SubsumptionReport {
  std::size_t dsl_pairs = 0;
  std::vector<PairRecord> llm_proposed;
  std::vector<PairRecord> refuted;  // LLM pairs dropped by an example
  std::vector<PairRecord> alarms;   // DSL pairs contradicted by an example
  std::set<std::string> skipped;    // ffr_skip_set
  std::string llm_failure;          // empty when the model step ran cleanly
  std::vector<std::string> warnings;
  std::map<std::string, std::size_t> provenance_counts;
};

// DSL pairs, then model pairs among candidates outside ffr_skip_set minus
// example refutations, then closure with a unit diagonal. `gateway` may be
// null; any model failure degrades to the DSL-only matrix.
SubsumptionMatrix build_subsumption_matrix(const CandidateSet& candidates, const ResultMatrix& m,
                                           std::span<const Label> labels, double tau,
                                           LlmGateway* gateway,
                                           SubsumptionReport* report = nullptr);

}  // namespace deltacheck

#endif  // DELTACHECK_SUBSUMPTION_HPP_
