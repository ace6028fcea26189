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

#include "deltacheck/subsumption.hpp"

#include <algorithm>
#include <limits>

#include <spdlog/spdlog.h>

#include "deltacheck/errors.hpp"
#include "deltacheck/generation.hpp"
#include "deltacheck/json_io.hpp"
#include "deltacheck/llm_gateway.hpp"

namespace deltacheck {
namespace {

using json = nlohmann::json;

constexpr std::string_view kListPrompt =
    "Here are all the functions I have:\n\n{assertion_blob}\n\nBased on the code, please "
    "identify every pair of functions where one function implies the other. Note that "
    "function A might imply function B, but function B may not imply function A. If two "
    "functions A and B check for the same thing, then they both imply each other (i.e., A "
    "implies B and B implies A), so you should list both directions. Feel free to use the "
    "function names to decide if two functions check for the same thing.";

constexpr std::string_view kFormatPrompt =
    "Please return your answer as a JSON list within ```json ``` ticks, where each element "
    "of the list is a tuple (A, B). If two functions A and B check for the same thing, make "
    "sure to include both tuples (A, B) and (B, A). For example, if I only had two functions "
    "`check_json` and `assert_json`, the answer should be: ```json\n[(\"check_json\", "
    "\"assert_json\"), (\"assert_json\", \"check_json\")]```";

constexpr std::string_view kRetryPrompt =
    "The following answer could not be parsed. Rewrite it, without changing its content, as "
    "a JSON list of [A, B] pairs within ```json ``` markers and reply with nothing else.\n\n";

// Python-style tuples and single-quoted strings to JSON arrays and strings.
std::string tuples_to_json(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  char quote = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quote != 0) {
      if (c == '\\' && i + 1 < text.size()) {
        if (quote == '\'' && text[i + 1] == '\'') {
          out += '\'';
        } else {
          out += c;
          out += text[i + 1];
        }
        ++i;
      } else if (c == quote) {
        out += '"';
        quote = 0;
      } else if (c == '"') {
        out += "\\\"";
      } else {
        out += c;
      }
      continue;
    }
    if (c == '"' || c == '\'') {
      // An apostrophe inside a word is prose, not a string delimiter.
      const bool word_inside = c == '\'' && i > 0 && std::isalnum(static_cast<unsigned char>(text[i - 1]));
      if (word_inside) {
        out += c;
        continue;
      }
      quote = c;
      out += '"';
    } else if (c == '(') {
      out += '[';
    } else if (c == ')') {
      out += ']';
    } else {
      out += c;
    }
  }
  return out;
}

std::optional<std::vector<std::pair<std::string, std::string>>> parse_pairs(
    std::string_view reply, std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = parse_fenced_json(tuples_to_json(reply));
  } catch (const GenerationParseError&) {
    return std::nullopt;
  }
  if (!doc.is_array()) return std::nullopt;
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& item : doc) {
    if (item.is_array() && item.size() == 2 && item[0].is_string() && item[1].is_string()) {
      pairs.emplace_back(item[0].get<std::string>(), item[1].get<std::string>());
    } else if (warnings) {
      warnings->push_back("ignoring malformed pair " + item.dump());
    }
  }
  return pairs;
}

bool interval_within(const AssertionSpec& a, const AssertionSpec& b) {
  constexpr auto kInf = std::numeric_limits<std::int64_t>::max();
  return a.min.value_or(0) >= b.min.value_or(0) && a.max.value_or(kInf) <= b.max.value_or(kInf);
}

template <typename T>
bool is_subset(std::vector<T> small, std::vector<T> big) {
  std::sort(small.begin(), small.end());
  std::sort(big.begin(), big.end());
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

bool shape_accepts(JsonShape wide, JsonShape narrow) {
  return wide == JsonShape::kAny || wide == narrow;
}

}  // namespace

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kDslRule: return "DSL_RULE";
    case Provenance::kLlm: return "LLM";
    case Provenance::kTransitive: return "TRANSITIVE";
  }
  return "TRANSITIVE";
}

Provenance parse_provenance(std::string_view name) {
  if (name == "DSL_RULE") return Provenance::kDslRule;
  if (name == "LLM") return Provenance::kLlm;
  if (name == "TRANSITIVE") return Provenance::kTransitive;
  throw ValidationError("unknown provenance '" + std::string(name) + "'");
}

std::size_t SubsumptionMatrix::index(const std::string& id) const {
  auto it = std::find(assertion_ids.begin(), assertion_ids.end(), id);
  if (it == assertion_ids.end()) throw UnknownAssertionError("unknown assertion '" + id + "'");
  return static_cast<std::size_t>(it - assertion_ids.begin());
}

bool SubsumptionMatrix::is_transitively_closed() const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!cells[i][j]) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (cells[j][k] && !cells[i][k]) return false;
      }
    }
  }
  return true;
}

void SubsumptionMatrix::validate() const {
  const std::size_t n = size();
  if (cells.size() != n) {
    throw DimensionMismatchError("subsumption matrix has " + std::to_string(cells.size()) +
                                 " rows for " + std::to_string(n) + " assertions");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    if (assertion_ids[i].empty() || !seen.insert(assertion_ids[i]).second) {
      throw ValidationError("empty or duplicate assertion id '" + assertion_ids[i] + "'");
    }
    if (cells[i].size() != n) {
      throw DimensionMismatchError("subsumption row " + std::to_string(i) + " has " +
                                   std::to_string(cells[i].size()) + " cells");
    }
    for (auto v : cells[i]) {
      if (v > 1) throw ValidationError("subsumption cells must be 0 or 1");
    }
    if (!cells[i][i]) {
      throw ValidationError("subsumption diagonal must be 1 (" + assertion_ids[i] + ")");
    }
  }
  for (const auto& [cell, p] : provenance) {
    if (cell.first >= n || cell.second >= n || cell.first == cell.second ||
        !cells[cell.first][cell.second]) {
      throw ValidationError("provenance given for an unset or diagonal cell");
    }
  }
}

SubsumptionMatrix identity_subsumption(const std::vector<std::string>& ids) {
  SubsumptionMatrix k;
  k.assertion_ids = ids;
  k.cells.assign(ids.size(), std::vector<std::uint8_t>(ids.size(), 0));
  for (std::size_t i = 0; i < ids.size(); ++i) k.cells[i][i] = 1;
  return k;
}

json subsumption_to_json(const SubsumptionMatrix& k) {
  json prov = json::object();
  for (const auto& [cell, p] : k.provenance) {
    prov[k.assertion_ids[cell.first] + "->" + k.assertion_ids[cell.second]] = to_string(p);
  }
  return json{{"assertion_ids", k.assertion_ids}, {"cells", k.cells}, {"provenance", prov}};
}

SubsumptionMatrix subsumption_from_json(const json& doc) {
  SubsumptionMatrix k;
  try {
    k.assertion_ids = doc.at("assertion_ids").get<std::vector<std::string>>();
    k.cells = doc.at("cells").get<std::vector<std::vector<std::uint8_t>>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed subsumption file: ") + e.what());
  }
  k.validate();
  if (doc.contains("provenance")) {
    const json& prov = doc["provenance"];
    if (!prov.is_object()) throw ValidationError("provenance must be an object");
    for (const auto& [key, value] : prov.items()) {
      const auto arrow = key.find("->");
      if (arrow == std::string::npos || !value.is_string()) {
        throw ValidationError("malformed provenance entry '" + key + "'");
      }
      std::size_t i, j;
      try {
        i = k.index(key.substr(0, arrow));
        j = k.index(key.substr(arrow + 2));
      } catch (const UnknownAssertionError& e) {
        throw ValidationError(std::string("provenance: ") + e.what());
      }
      k.provenance[{i, j}] = parse_provenance(value.get<std::string>());
    }
  }
  k.validate();
  return k;
}

SubsumptionMatrix load_subsumption(const std::filesystem::path& path) {
  return subsumption_from_json(read_json_file(path));
}

bool dsl_subsumes(const AssertionSpec& a, const AssertionSpec& b) {
  if (same_spec(a, b)) return true;

  if (a.kind == AssertionKind::kAllOf) {
    for (const auto& c : a.children) {
      if (dsl_subsumes(c, b)) return true;
    }
  }
  if (a.kind == AssertionKind::kAnyOf &&
      std::all_of(a.children.begin(), a.children.end(),
                  [&](const AssertionSpec& c) { return dsl_subsumes(c, b); })) {
    return true;
  }
  if (b.kind == AssertionKind::kAnyOf) {
    for (const auto& c : b.children) {
      if (dsl_subsumes(a, c)) return true;
    }
  }
  if (b.kind == AssertionKind::kAllOf &&
      std::all_of(b.children.begin(), b.children.end(),
                  [&](const AssertionSpec& c) { return dsl_subsumes(a, c); })) {
    return true;
  }

  switch (a.kind) {
    case AssertionKind::kContainsAll:
      return b.kind == AssertionKind::kContainsAll && is_subset(b.operands, a.operands);
    case AssertionKind::kExcludesAll:
      return b.kind == AssertionKind::kExcludesAll && is_subset(b.operands, a.operands);
    case AssertionKind::kWordCount:
    case AssertionKind::kSentenceCount:
      return b.kind == a.kind && interval_within(a, b);
    case AssertionKind::kJsonListMinLen:
      if (b.kind == AssertionKind::kJsonListMinLen) return a.min.value_or(0) >= b.min.value_or(0);
      return b.kind == AssertionKind::kJsonParseable && shape_accepts(b.shape, JsonShape::kList);
    case AssertionKind::kJsonRequiredKeys:
      if (b.kind == AssertionKind::kJsonRequiredKeys) return is_subset(b.keys, a.keys);
      return b.kind == AssertionKind::kJsonParseable && shape_accepts(b.shape, JsonShape::kObject);
    case AssertionKind::kJsonParseable:
      return b.kind == AssertionKind::kJsonParseable && b.shape == JsonShape::kAny;
    default:
      return false;
  }
}

std::string render_assertion_blob(const CandidateSet& candidates) {
  std::string blob;
  for (const auto& c : candidates.candidates) {
    blob += "def " + c.id + "(example, prompt, response):\n";
    if (!c.concept_text.empty()) blob += "    # " + c.concept_text + "\n";
    blob += "    # passes when: " + describe(c.spec) + "\n\n";
  }
  while (!blob.empty() && blob.back() == '\n') blob.pop_back();
  return blob;
}

std::vector<std::pair<std::string, std::string>> llm_subsumption_pairs(
    const CandidateSet& candidates, LlmGateway& gateway, std::vector<std::string>* warnings,
    std::string* failure) {
  if (candidates.size() < 2) {
    throw PreconditionError("subsumption needs at least two candidates");
  }
  LlmRequest list;
  list.kind = RequestKind::kSubsumeList;
  list.temperature = 0.0;
  list.user_text = std::string(kListPrompt);
  list.user_text.replace(list.user_text.find("{assertion_blob}"), 16,
                         render_assertion_blob(candidates));
  const std::string analysis = gateway.complete(list).text;

  LlmRequest format;
  format.kind = RequestKind::kSubsumeFormat;
  format.temperature = 0.0;
  format.user_text = "Here is an analysis of which functions imply each other:\n\n" + analysis +
                     "\n\n" + std::string(kFormatPrompt);
  std::string reply = gateway.complete(format).text;
  auto pairs = parse_pairs(reply, warnings);
  if (!pairs) {
    LlmRequest retry;
    retry.kind = RequestKind::kSubsumeFormat;
    retry.temperature = 0.0;
    retry.user_text = std::string(kRetryPrompt) + reply;
    pairs = parse_pairs(gateway.complete(retry).text, warnings);
  }
  if (!pairs) {
    if (failure) *failure = "subsumption pairs could not be parsed after one retry";
    return {};
  }

  const auto ids = candidates.ids();
  const std::set<std::string> known(ids.begin(), ids.end());
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<std::pair<std::string, std::string>> out;
  for (auto& [a, b] : *pairs) {
    if (!known.count(a) || !known.count(b)) {
      if (warnings) warnings->push_back("dropping pair with unknown function (" + a + ", " + b + ")");
      continue;
    }
    if (a == b) continue;
    if (seen.insert({a, b}).second) out.emplace_back(a, b);
  }
  return out;
}

std::optional<std::size_t> refutation_witness(const std::string& i, const std::string& j,
                                              const ResultMatrix& m) {
  const std::size_t ci = m.assertion_index(i);
  const std::size_t cj = m.assertion_index(j);
  for (std::size_t row = 0; row < m.rows(); ++row) {
    if (m.passes(row, ci) && !m.passes(row, cj)) return row;
  }
  return std::nullopt;
}

bool prune_pair_by_examples(const std::string& i, const std::string& j, const ResultMatrix& m) {
  return refutation_witness(i, j, m).has_value();
}

std::set<std::string> ffr_skip_set(const ResultMatrix& m, std::span<const Label> labels,
                                   double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw PreconditionError("tau must lie in [0, 1]");
  std::set<std::string> out;
  for (const auto& id : m.assertion_ids) {
    const double f = single_ffr(m, labels, id);
    if (f > 0.0 && f >= tau - 1e-12) out.insert(id);
  }
  return out;
}

void transitive_closure(SubsumptionMatrix& k) {
  const std::size_t n = k.size();
  for (std::size_t via = 0; via < n; ++via) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!k.cells[i][via]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (k.cells[via][j] && !k.cells[i][j]) {
          k.cells[i][j] = 1;
          if (i != j) k.provenance[{i, j}] = Provenance::kTransitive;
        }
      }
    }
  }
}

SubsumptionMatrix build_subsumption_matrix(const CandidateSet& candidates, const ResultMatrix& m,
                                           std::span<const Label> labels, double tau,
                                           LlmGateway* gateway, SubsumptionReport* report) {
  SubsumptionReport local;
  SubsumptionReport& rep = report ? *report : local;
  const auto ids = candidates.ids();
  if (ids != m.assertion_ids) {
    throw DimensionMismatchError("candidate ids do not match the result matrix columns");
  }
  if (labels.size() != m.rows()) {
    throw DimensionMismatchError("label count does not match the result matrix rows");
  }

  SubsumptionMatrix k = identity_subsumption(ids);
  const std::size_t n = ids.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || !dsl_subsumes(candidates.candidates[i].spec, candidates.candidates[j].spec)) {
        continue;
      }
      k.cells[i][j] = 1;
      k.provenance[{i, j}] = Provenance::kDslRule;
      ++rep.dsl_pairs;
      if (auto row = refutation_witness(ids[i], ids[j], m)) {
        rep.alarms.push_back({ids[i], ids[j], m.example_ids[*row]});
        spdlog::error("rule pair {} -> {} contradicted by example {}", ids[i], ids[j],
                      m.example_ids[*row]);
      }
    }
  }

  rep.skipped = ffr_skip_set(m, labels, tau);
  CandidateSet eligible;
  for (const auto& c : candidates.candidates) {
    if (!rep.skipped.count(c.id)) eligible.candidates.push_back(c);
  }
  if (gateway == nullptr || gateway->config().mode == GatewayMode::kOff) {
    rep.llm_failure = "LLM gateway disabled";
  } else if (eligible.size() >= 2) {
    std::vector<std::pair<std::string, std::string>> pairs;
    try {
      pairs = llm_subsumption_pairs(eligible, *gateway, &rep.warnings, &rep.llm_failure);
    } catch (const Error& e) {
      rep.llm_failure = std::string(e.kind()) + ": " + e.what();
    }
    for (const auto& [a, b] : pairs) {
      const std::size_t i = k.index(a);
      const std::size_t j = k.index(b);
      PairRecord record{a, b, {}};
      if (auto row = refutation_witness(a, b, m)) {
        record.witness_example = m.example_ids[*row];
        rep.refuted.push_back(record);
      } else if (!k.cells[i][j]) {
        k.cells[i][j] = 1;
        k.provenance[{i, j}] = Provenance::kLlm;
      }
      rep.llm_proposed.push_back(std::move(record));
    }
  }
  if (!rep.llm_failure.empty()) {
    spdlog::warn("subsumption uses rule pairs only: {}", rep.llm_failure);
  }
  for (auto& w : rep.warnings) spdlog::warn("{}", w);

  transitive_closure(k);
  rep.provenance_counts.clear();
  for (const auto& [cell, p] : k.provenance) ++rep.provenance_counts[std::string(to_string(p))];
  k.validate();
  return k;
}

}  // namespace deltacheck
