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

#ifndef DELTACHECK_CANDIDATES_HPP_
#define DELTACHECK_CANDIDATES_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deltacheck/assertion_spec.hpp"
#include "deltacheck/taxonomy.hpp"

namespace deltacheck {

struct Candidate {
  std::string id;
  int delta_version = 0;
  std::string concept_text;
  CategoryName category = CategoryName::kOther;
  AssertionSpec spec;  // spec.id == id
};

struct CandidateSet {
  std::vector<Candidate> candidates;

  std::size_t size() const { return candidates.size(); }
  bool empty() const { return candidates.empty(); }
  std::vector<std::string> ids() const;
  // Throws ValidationError on duplicate or empty ids.
  void validate() const;
};

nlohmann::json candidates_to_json(const CandidateSet& set);
CandidateSet candidates_from_json(const nlohmann::json& doc);
CandidateSet load_candidates(const std::filesystem::path& path);

}  // namespace deltacheck

#endif  // DELTACHECK_CANDIDATES_HPP_
