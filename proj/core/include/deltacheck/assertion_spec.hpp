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

#ifndef DELTACHECK_ASSERTION_SPEC_HPP_
#define DELTACHECK_ASSERTION_SPEC_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace deltacheck {

enum class AssertionKind {
  kContainsAll,
  kContainsAny,
  kExcludesAll,
  kStartsWith,
  kRegexMatch,
  kWordCount,
  kSentenceCount,
  kJsonParseable,
  kJsonListMinLen,
  kJsonRequiredKeys,
  kLlmQuestion,
  kAllOf,
  kAnyOf,
};

std::string_view to_string(AssertionKind kind);  // e.g. "contains_all"
AssertionKind parse_assertion_kind(std::string_view name);

// A string operand is either literal text or the name of a field in the
// example's input record.
struct StringOperand {
  enum class Source { kLiteral, kField };

  Source source = Source::kLiteral;
  std::string value;
  bool fold_case = false;

  static StringOperand literal(std::string text, bool fold = false) {
    return {Source::kLiteral, std::move(text), fold};
  }
  static StringOperand field(std::string name, bool fold = false) {
    return {Source::kField, std::move(name), fold};
  }

  friend auto operator<=>(const StringOperand&, const StringOperand&) = default;
};

enum class JsonShape { kAny, kList, kObject };

std::string_view to_string(JsonShape shape);

inline constexpr int kMaxCombinatorDepth = 3;
inline constexpr std::size_t kMaxLlmQuestions = 2;

// A candidate assertion. Only the fields relevant to `kind` are meaningful:
//
//   contains_all / contains_any / excludes_all   operands (>= 1)
//   starts_with                                  operands (exactly 1)
//   regex_match                                  pattern
//   word_count / sentence_count                  min and/or max
//   json_parseable                               shape
//   json_list_min_len                            min
//   json_required_keys                           keys (>= 1)
//   llm_question                                 questions (1 or 2, conjunction)
//   all_of / any_of                              children (>= 1)
struct AssertionSpec {
  std::string id;
  AssertionKind kind = AssertionKind::kContainsAll;
  std::vector<StringOperand> operands;
  std::string pattern;
  std::optional<std::int64_t> min;
  std::optional<std::int64_t> max;
  JsonShape shape = JsonShape::kAny;
  std::vector<std::string> keys;
  std::vector<std::string> questions;
  std::vector<AssertionSpec> children;

  // Throws InvalidSpecError naming the violated invariant.
  void validate() const;

  // Combinator nesting: 0 for a leaf, 1 for all_of over leaves, and so on.
  int depth() const;

  bool uses_llm() const;
};

// JSON form without the id. Operand order is preserved.
nlohmann::json spec_to_json(const AssertionSpec& spec);

// Parses and validates; throws InvalidSpecError.
AssertionSpec spec_from_json(const nlohmann::json& doc);

// Structural identity, ignoring ids. Set-valued operands (contains and
// excludes operands, required keys) compare as sets.
bool same_spec(const AssertionSpec& a, const AssertionSpec& b);

// One-line readable rendering used in LLM prompts and reports.
std::string describe(const AssertionSpec& spec);

// JSON grammar of the DSL, embedded in the synthesis prompt.
std::string_view dsl_reference();

}  // namespace deltacheck

#endif  // DELTACHECK_ASSERTION_SPEC_HPP_
