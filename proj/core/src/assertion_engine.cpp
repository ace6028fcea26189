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

#include "deltacheck/assertion_engine.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include <boost/regex.hpp>

#include "deltacheck/errors.hpp"
#include "deltacheck/json_io.hpp"
#include "deltacheck/llm_gateway.hpp"
#include "deltacheck/prompt_history.hpp"
#include "deltacheck/text.hpp"

namespace deltacheck {
namespace {

using json = nlohmann::json;

class FieldResolutionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "FieldResolutionError"; }
};

class RegexError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "RegexError"; }
};

std::string resolve(const StringOperand& op, const ExampleRun& example) {
  if (op.source == StringOperand::Source::kLiteral) return op.value;
  auto it = example.input.find(op.value);
  if (it == example.input.end()) {
    throw FieldResolutionError("example " + example.id + " has no field '" + op.value + "'");
  }
  return it->second;
}

bool contains(const ExampleRun& example, const StringOperand& op,
              const std::string& response, const std::string& folded_response) {
  const std::string needle = resolve(op, example);
  if (op.fold_case) return folded_response.find(text::fold_case(needle)) != std::string::npos;
  return response.find(needle) != std::string::npos;
}

bool within(std::int64_t value, const AssertionSpec& spec) {
  return (!spec.min || value >= *spec.min) && (!spec.max || value <= *spec.max);
}

std::optional<json> parse_response_json(const std::string& response) {
  auto doc = json::parse(text::trim(response), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) return std::nullopt;
  return doc;
}

bool evaluate_checked(const AssertionSpec& spec, const ExampleRun& ex, LlmGateway* gateway) {
  const std::string& response = ex.response;
  switch (spec.kind) {
    case AssertionKind::kContainsAll:
    case AssertionKind::kContainsAny:
    case AssertionKind::kExcludesAll: {
      const std::string folded = text::fold_case(response);
      std::size_t hits = 0;
      for (const auto& op : spec.operands) hits += contains(ex, op, response, folded) ? 1 : 0;
      if (spec.kind == AssertionKind::kContainsAll) return hits == spec.operands.size();
      if (spec.kind == AssertionKind::kContainsAny) return hits > 0;
      return hits == 0;
    }
    case AssertionKind::kStartsWith: {
      const auto& op = spec.operands.front();
      std::string prefix = resolve(op, ex);
      std::string_view rest(response);
      while (!rest.empty() && text::is_space(rest.front())) rest.remove_prefix(1);
      std::string body(rest);
      if (op.fold_case) {
        prefix = text::fold_case(prefix);
        body = text::fold_case(body);
      }
      return body.compare(0, prefix.size(), prefix) == 0;
    }
    case AssertionKind::kRegexMatch:
      try {
        boost::regex re(spec.pattern, boost::regex::perl);
        return boost::regex_search(response, re);
      } catch (const std::runtime_error& e) {
        throw RegexError(e.what());
      }
    case AssertionKind::kWordCount:
      return within(static_cast<std::int64_t>(text::count_words(response)), spec);
    case AssertionKind::kSentenceCount:
      return within(static_cast<std::int64_t>(segment_sentences(response).size()), spec);
    case AssertionKind::kJsonParseable: {
      auto doc = parse_response_json(response);
      if (!doc) return false;
      if (spec.shape == JsonShape::kList) return doc->is_array();
      if (spec.shape == JsonShape::kObject) return doc->is_object();
      return true;
    }
    case AssertionKind::kJsonListMinLen: {
      auto doc = parse_response_json(response);
      return doc && doc->is_array() &&
             static_cast<std::int64_t>(doc->size()) >= spec.min.value_or(0);
    }
    case AssertionKind::kJsonRequiredKeys: {
      auto doc = parse_response_json(response);
      if (!doc || !doc->is_object()) return false;
      return std::all_of(spec.keys.begin(), spec.keys.end(),
                         [&](const std::string& k) { return doc->contains(k); });
    }
    case AssertionKind::kLlmQuestion:
      if (gateway == nullptr) throw ProviderError("no LLM gateway configured");
      for (const auto& q : spec.questions) {
        if (!gateway->ask_boolean(ex.formatted_prompt, response, q)) return false;
      }
      return true;
    case AssertionKind::kAllOf:
      for (const auto& c : spec.children) {
        if (!evaluate_checked(c, ex, gateway)) return false;
      }
      return true;
    case AssertionKind::kAnyOf:
      for (const auto& c : spec.children) {
        if (evaluate_checked(c, ex, gateway)) return true;
      }
      return false;
  }
  return false;
}

std::size_t count_label(std::span<const Label> labels, Label which) {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), which));
}

// Examples flagged (deemed failures) by the conjunction of `selected`.
std::vector<bool> flagged_rows(const ResultMatrix& m, std::span<const Label> labels,
                               const std::set<std::string>& selected) {
  if (labels.size() != m.rows()) {
    throw DimensionMismatchError("labels do not match the matrix rows");
  }
  const auto cols = m.assertion_indices(selected);
  std::vector<bool> flagged(m.rows(), false);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j : cols) {
      if (!m.passes(i, j)) {
        flagged[i] = true;
        break;
      }
    }
  }
  return flagged;
}

}  // namespace

std::vector<Label> ExampleSet::labels() const {
  std::vector<Label> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.label);
  return out;
}

std::vector<std::string> ExampleSet::ids() const {
  std::vector<std::string> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.id);
  return out;
}

void ExampleSet::validate() const {
  if (examples.empty()) throw ValidationError("the example set is empty");
  std::set<std::string> seen;
  for (const auto& e : examples) {
    if (e.id.empty()) throw ValidationError("example with an empty id");
    if (!seen.insert(e.id).second) throw ValidationError("duplicate example id " + e.id);
    if (e.formatted_prompt.empty()) {
      throw ValidationError("example " + e.id + " has an empty formatted_prompt");
    }
  }
}

const ExampleRun& ExampleSet::sample() const {
  if (examples.empty()) throw PreconditionError("no examples to sample from");
  for (const auto& e : examples) {
    if (e.label == Label::kGood) return e;
  }
  return examples.front();
}

json examples_to_json(const ExampleSet& set) {
  json list = json::array();
  for (const auto& e : set.examples) {
    list.push_back({{"id", e.id},
                    {"input", e.input},
                    {"formatted_prompt", e.formatted_prompt},
                    {"response", e.response},
                    {"label", e.label == Label::kGood ? 1 : 0}});
  }
  return {{"examples", std::move(list)}};
}

ExampleSet examples_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("examples") || !doc["examples"].is_array()) {
    throw ParseError("examples document needs an \"examples\" array");
  }
  ExampleSet set;
  for (const auto& item : doc["examples"]) {
    try {
      ExampleRun e;
      e.id = item.at("id").get<std::string>();
      if (item.contains("input")) {
        for (const auto& [k, v] : item.at("input").items()) {
          e.input[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
      }
      e.formatted_prompt = item.at("formatted_prompt").get<std::string>();
      e.response = item.at("response").get<std::string>();
      const auto& label = item.at("label");
      if (!label.is_number_integer() || (label.get<int>() != 0 && label.get<int>() != 1)) {
        throw ParseError("example " + e.id + " label must be 0 or 1");
      }
      e.label = label.get<int>() == 1 ? Label::kGood : Label::kBad;
      set.examples.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw ParseError(std::string("malformed example entry: ") + ex.what());
    }
  }
  set.validate();
  return set;
}

ExampleSet load_examples(const std::filesystem::path& path) {
  return examples_from_json(read_json_file(path));
}

std::size_t ResultMatrix::assertion_index(const std::string& id) const {
  auto it = std::find(assertion_ids.begin(), assertion_ids.end(), id);
  if (it == assertion_ids.end()) throw UnknownAssertionError("unknown assertion " + id);
  return static_cast<std::size_t>(it - assertion_ids.begin());
}

std::vector<std::size_t> ResultMatrix::assertion_indices(const std::set<std::string>& ids) const {
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(assertion_index(id));
  return out;
}

void ResultMatrix::validate() const {
  if (cells.size() != example_ids.size()) {
    throw DimensionMismatchError("matrix has " + std::to_string(cells.size()) + " rows but " +
                                 std::to_string(example_ids.size()) + " example ids");
  }
  for (const auto& row : cells) {
    if (row.size() != assertion_ids.size()) {
      throw DimensionMismatchError("matrix row width does not match the assertion ids");
    }
    for (auto v : row) {
      if (v > 1) throw ValidationError("matrix cells must be 0 or 1");
    }
  }
  std::set<std::string> unique(assertion_ids.begin(), assertion_ids.end());
  if (unique.size() != assertion_ids.size()) {
    throw ValidationError("duplicate assertion id in matrix");
  }
}

json matrix_to_json(const ResultMatrix& m) {
  return {{"example_ids", m.example_ids}, {"assertion_ids", m.assertion_ids}, {"cells", m.cells}};
}

ResultMatrix matrix_from_json(const json& doc) {
  ResultMatrix m;
  try {
    m.example_ids = doc.at("example_ids").get<std::vector<std::string>>();
    m.assertion_ids = doc.at("assertion_ids").get<std::vector<std::string>>();
    for (const auto& row : doc.at("cells")) {
      std::vector<std::uint8_t> r;
      for (const auto& v : row) {
        if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1)) {
          throw ParseError("matrix cells must be 0 or 1");
        }
        r.push_back(static_cast<std::uint8_t>(v.get<int>()));
      }
      m.cells.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed matrix: ") + e.what());
  }
  m.validate();
  return m;
}

ResultMatrix load_matrix(const std::filesystem::path& path) {
  return matrix_from_json(read_json_file(path));
}

void EvaluationLog::record(EvaluationError error) {
  std::lock_guard<std::mutex> lock(mutex_);
  entries_.push_back(std::move(error));
}

std::vector<EvaluationError> EvaluationLog::entries() const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto out = entries_;
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.assertion_id, a.example_id) < std::tie(b.assertion_id, b.example_id);
  });
  return out;
}

std::size_t EvaluationLog::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

bool evaluate_assertion(const AssertionSpec& spec, const ExampleRun& example,
                        LlmGateway* gateway, EvaluationLog* log) {
  try {
    return evaluate_checked(spec, example, gateway);
  } catch (const Error& e) {
    if (log) log->record({spec.id, example.id, e.kind(), e.what()});
  } catch (const std::exception& e) {
    if (log) log->record({spec.id, example.id, "std::exception", e.what()});
  }
  return false;
}

ResultMatrix build_result_matrix(const CandidateSet& candidates, const ExampleSet& examples,
                                 LlmGateway* gateway, EvaluationLog* log, unsigned threads) {
  if (candidates.empty()) throw PreconditionError("no candidate assertions to evaluate");
  if (examples.examples.empty()) throw PreconditionError("no examples to evaluate");

  ResultMatrix m;
  m.example_ids = examples.ids();
  m.assertion_ids = candidates.ids();
  const std::size_t n = m.example_ids.size();
  const std::size_t cols = m.assertion_ids.size();
  m.cells.assign(n, std::vector<std::uint8_t>(cols, 0));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t cell = next++; cell < n * cols; cell = next++) {
      const std::size_t i = cell / cols;
      const std::size_t j = cell % cols;
      m.cells[i][j] = evaluate_assertion(candidates.candidates[j].spec,
                                         examples.examples[i], gateway, log)
                          ? 1
                          : 0;
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return m;
}

double set_coverage(const ResultMatrix& m, std::span<const Label> labels,
                    const std::set<std::string>& selected) {
  const auto flagged = flagged_rows(m, labels, selected);
  const std::size_t bad = count_label(labels, Label::kBad);
  if (bad == 0) return 1.0;
  std::size_t caught = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Label::kBad && flagged[i]) ++caught;
  }
  return static_cast<double>(caught) / static_cast<double>(bad);
}

double set_ffr(const ResultMatrix& m, std::span<const Label> labels,
               const std::set<std::string>& selected) {
  const auto flagged = flagged_rows(m, labels, selected);
  const std::size_t good = count_label(labels, Label::kGood);
  if (good == 0) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Label::kGood && flagged[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(good);
}

double single_ffr(const ResultMatrix& m, std::span<const Label> labels,
                  const std::string& assertion_id) {
  return set_ffr(m, labels, {assertion_id});
}

}  // namespace deltacheck
