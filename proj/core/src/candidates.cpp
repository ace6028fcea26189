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

#include "deltacheck/candidates.hpp"

#include <set>

#include "deltacheck/errors.hpp"
#include "deltacheck/json_io.hpp"

namespace deltacheck {

std::vector<std::string> CandidateSet::ids() const {
  std::vector<std::string> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(c.id);
  return out;
}

void CandidateSet::validate() const {
  std::set<std::string> seen;
  for (const auto& c : candidates) {
    if (c.id.empty()) throw ValidationError("candidate with an empty id");
    if (!seen.insert(c.id).second) throw ValidationError("duplicate candidate id " + c.id);
    c.spec.validate();
  }
}

nlohmann::json candidates_to_json(const CandidateSet& set) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : set.candidates) {
    list.push_back({{"id", c.id},
                    {"delta_version", c.delta_version},
                    {"concept", c.concept_text},
                    {"category", std::string(to_string(c.category))},
                    {"spec", spec_to_json(c.spec)}});
  }
  return {{"candidates", std::move(list)}};
}

CandidateSet candidates_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("candidates") || !doc["candidates"].is_array()) {
    throw ParseError("candidate document needs a \"candidates\" array");
  }
  CandidateSet set;
  for (const auto& item : doc["candidates"]) {
    try {
      Candidate c;
      c.id = item.at("id").get<std::string>();
      c.delta_version = item.value("delta_version", 0);
      c.concept_text = item.value("concept", std::string());
      c.category = parse_category_name(item.value("category", std::string("OTHER")));
      c.spec = spec_from_json(item.at("spec"));
      c.spec.id = c.id;
      set.candidates.push_back(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed candidate entry: ") + e.what());
    }
  }
  set.validate();
  return set;
}

CandidateSet load_candidates(const std::filesystem::path& path) {
  return candidates_from_json(read_json_file(path));
}

}  // namespace deltacheck
