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

#include "deltacheck/generation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <optional>
#include <thread>

#include <spdlog/spdlog.h>

#include "deltacheck/errors.hpp"
#include "deltacheck/llm_gateway.hpp"
#include "deltacheck/text.hpp"

namespace deltacheck {
namespace {

using json = nlohmann::json;

constexpr std::string_view kCategorizeTemplate = R"(Here are the changed lines in my prompt template:

"{prompt_diff}"

I want to write assertions for my LLM pipeline to run on all pipeline responses. Here are some categories of assertion concepts I want to check for:

- Presentation Format: Is there a specific format for the response, like a comma-separated list or a JSON object?
- Example Demonstration: Does the prompt template include any examples of good responses that demonstrate any specific headers, keys, or structures?
- Workflow Description: Does the prompt template include any descriptions of the workflow that the LLM should follow, indicating possible assertion concepts?
- Count: Are there any instructions regarding the number of items of a certain type in the response, such as "at least", "at most", or an exact number?
- Inclusion: Are there keywords that every LLM response should include?
- Exclusion: Are there keywords that every LLM response should never mention?
- Qualitative Assessment: Are there qualitative criteria for assessing good responses, including specific requirements for length, tone, or style?
- Other: Based on the prompt template, are there any other concepts to check in assertions that are not covered by the above categories?

Give me a list of concepts to check for in LLM responses. Each item in the list should contain a string description of a concept to check for, its corresponding category, and the source, or phrase in the prompt template that triggered the concept. For example, if the prompt template is "I am a still-life artist. Give me a bulleted list of colors that I can use to paint <object>.", then a concept might be "The response should include a bulleted list of colors." with category "Presentation Format" and source "Give me a bulleted list of colors".

Your answer should be a JSON list of objects within ```json ``` markers, where each object has the following fields: "concept", "category", and "source". This list should contain as many assertion concepts as you can think of, as long are specific and reasonable.)";

constexpr std::string_view kSynthesisTemplate = R"(Here is my prompt template:

"{prompt_template}"

Here is an example and its corresponding LLM response:

Example: {sample_example}
LLM Response: {sample_response}

Here are the concepts I want to check for in LLM responses:

{concepts}

Give me a list of assertions, written in the JSON assertion language below, that can be used to check for these concepts in LLM responses. Assertions can use the "llm_question" kind if the concept is too hard to evaluate with the other kinds alone (e.g., qualitative criteria). An "llm_question" assertion submits the formatted prompt, the response, and each question to an expert LLM, which returns True or False based on the context. Since "llm_question" calls can be expensive, you can batch similar concepts that require LLMs to evaluate into a single assertion, but do not cover more than two concepts with an assertion. For concepts that are ambiguous to evaluate, you should write multiple different assertions (e.g., different questions, or a word-count check and a sentence-count check) for the same concept(s).

Each assertion is evaluated on an example (dict with string keys), the prompt formatted on that example (string), and the LLM response (string), and passes when the response satisfies the concept(s) covered by the assertion.

{dsl_reference}

Here is a sample assertion for an LLM pipeline that generates summaries:

```json
{"name": "assert_simple_and_coherent_narrative", "description": "Check that the summary forms a simple, coherent narrative telling a complete story.", "concepts": [1], "spec": {"kind": "llm_question", "questions": ["Does the summary form a simple, coherent narrative telling a complete story?"]}}
```

Your answer should be a JSON list of objects within ```json ``` markers. Each object has the fields "name" (a distinct, descriptive snake_case name), "description" (what the assertion checks for), "concepts" (the numbers of the one or two concepts it covers), and "spec" (the assertion).)";

constexpr std::string_view kReformatTemplate = R"(The following answer could not be parsed. Rewrite it, without changing its content, as a JSON list within ```json ``` markers and reply with nothing else.

{reply})";

void replace_all(std::string& s, std::string_view key, std::string_view value) {
  std::size_t pos = 0;
  while ((pos = s.find(key, pos)) != std::string::npos) {
    s.replace(pos, key.size(), value);
    pos += value.size();
  }
}

std::optional<json> try_parse(std::string_view s) {
  auto doc = json::parse(s, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) return std::nullopt;
  return doc;
}

// Index one past the bracket closing the one at `open`, honoring strings.
std::optional<std::size_t> balanced_end(std::string_view s, std::size_t open) {
  std::vector<char> stack;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      stack.push_back(c == '[' ? ']' : '}');
    } else if (c == ']' || c == '}') {
      if (stack.empty() || stack.back() != c) return std::nullopt;
      stack.pop_back();
      if (stack.empty()) return i + 1;
    }
  }
  return std::nullopt;
}

std::size_t find_fence(std::string_view s, std::size_t from) {
  const std::string folded = text::fold_case(s);
  return folded.find("```json", from);
}

// Reply must hold a JSON list; otherwise ask once for a reformatted answer.
json request_json_list(LlmGateway& gateway, LlmRequest request) {
  std::string reply = gateway.complete(request).text;
  try {
    auto doc = parse_fenced_json(reply);
    if (doc.is_array()) return doc;
  } catch (const GenerationParseError&) {
  }
  LlmRequest retry;
  retry.kind = request.kind;
  retry.temperature = 0.0;
  retry.user_text = std::string(kReformatTemplate);
  replace_all(retry.user_text, "{reply}", reply);
  auto doc = parse_fenced_json(gateway.complete(retry).text);
  if (!doc.is_array()) throw GenerationParseError("model reply is not a JSON list");
  return doc;
}

std::string string_field(const json& obj, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    if (obj.contains(k) && obj[k].is_string()) return std::string(text::trim(obj[k].get<std::string>()));
  }
  return {};
}

std::string trim_quotes(std::string s) {
  auto t = text::trim(s);
  while (t.size() >= 2 && (t.front() == '"' || t.front() == '\'') && t.back() == t.front()) {
    t = text::trim(t.substr(1, t.size() - 2));
  }
  return std::string(t);
}

std::string concept_list(const std::vector<CriterionConcept>& concepts) {
  std::string out;
  for (std::size_t i = 0; i < concepts.size(); ++i) {
    const auto& c = concepts[i];
    out += std::to_string(i + 1) + ". [" + std::string(to_string(c.category.name)) + "] " +
           c.description + " (source: \"" + c.source + "\")\n";
  }
  return out;
}

std::string name_slug(const std::string& name, const std::string& fallback) {
  std::string slug = text::slugify(name.empty() ? fallback : name, 64);
  if (slug.rfind("assert_", 0) == 0 && slug.size() > 7) slug = slug.substr(7);
  if (slug.size() > 40) slug.resize(40);
  while (!slug.empty() && slug.back() == '_') slug.pop_back();
  return slug;
}

}  // namespace

json parse_fenced_json(std::string_view text) {
  std::size_t fence = find_fence(text, 0);
  while (fence != std::string::npos) {
    const std::size_t body = fence + 7;
    const std::size_t close = text.find("```", body);
    auto inner = text.substr(body, close == std::string::npos ? std::string_view::npos
                                                              : close - body);
    if (auto doc = try_parse(text::trim(inner))) return *doc;
    fence = close == std::string::npos ? close : find_fence(text, close + 3);
  }
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '[' && text[i] != '{') continue;
    if (auto end = balanced_end(text, i)) {
      if (auto doc = try_parse(text.substr(i, *end - i))) return *doc;
    }
  }
  throw GenerationParseError("no JSON found in model reply");
}

std::string render_categorize_prompt(const PromptDelta& delta) {
  std::string prompt(kCategorizeTemplate);
  std::string diff = delta.render();
  if (!diff.empty() && diff.back() == '\n') diff.pop_back();
  replace_all(prompt, "{prompt_diff}", diff);
  return prompt;
}

std::string render_synthesis_prompt(const std::vector<CriterionConcept>& concepts,
                                    const PromptTemplate& final_prompt,
                                    const ExampleRun& sample) {
  std::string prompt(kSynthesisTemplate);
  // Substitute the fixed parts first so user text containing "{...}" is not
  // re-expanded.
  replace_all(prompt, "{dsl_reference}", dsl_reference());
  const std::string example = json(sample.input).dump();
  std::string out;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = prompt.find('{', pos);
    if (open == std::string::npos) break;
    std::size_t close = prompt.find('}', open);
    std::string_view key(prompt.data() + open, close == std::string::npos ? 0 : close - open + 1);
    std::string value;
    bool known = true;
    if (key == "{prompt_template}") {
      value = final_prompt.text;
    } else if (key == "{sample_example}") {
      value = example;
    } else if (key == "{sample_response}") {
      value = sample.response;
    } else if (key == "{concepts}") {
      value = concept_list(concepts);
    } else {
      known = false;
    }
    if (known) {
      out.append(prompt, pos, open - pos);
      out += value;
      pos = close + 1;
    } else {
      out.append(prompt, pos, open - pos + 1);
      pos = open + 1;
    }
  }
  out.append(prompt, pos, std::string::npos);
  return out;
}

std::vector<CriterionConcept> categorize_delta(const PromptDelta& delta, LlmGateway& gateway) {
  if (delta.entries.empty()) {
    throw PreconditionError("cannot categorize an empty delta (version " +
                            std::to_string(delta.to_version) + ")");
  }
  LlmRequest request;
  request.kind = RequestKind::kCategorize;
  request.temperature = gateway.config().generation_temperature;
  request.user_text = render_categorize_prompt(delta);
  const json items = request_json_list(gateway, request);

  std::vector<CriterionConcept> concepts;
  for (const auto& item : items) {
    if (!item.is_object()) continue;
    CriterionConcept c;
    c.description = string_field(item, {"concept", "criterion", "description"});
    c.source = trim_quotes(string_field(item, {"source"}));
    const std::string label = string_field(item, {"category"});
    if (c.description.empty() || c.source.empty()) {
      spdlog::warn("dropping concept without description or source in delta {}",
                   delta.to_version);
      continue;
    }
    c.category = map_category_label(label);
    c.delta_version = delta.to_version;
    c.unsourced = std::none_of(delta.entries.begin(), delta.entries.end(),
                               [&](const DeltaEntry& e) {
                                 return e.sentence.find(c.source) != std::string::npos;
                               });
    concepts.push_back(std::move(c));
  }
  return concepts;
}

std::vector<Candidate> synthesize_assertions(const std::vector<CriterionConcept>& concepts,
                                             const PromptTemplate& final_prompt,
                                             const ExampleRun& sample, LlmGateway& gateway,
                                             std::vector<std::string>* warnings) {
  if (concepts.empty()) throw PreconditionError("no concepts to synthesize assertions for");
  if (text::trim(sample.response).empty()) {
    throw PreconditionError("the sample example has an empty response");
  }
  auto warn = [&](std::string message) {
    spdlog::warn("{}", message);
    if (warnings) warnings->push_back(std::move(message));
  };

  LlmRequest request;
  request.kind = RequestKind::kSynthesize;
  request.temperature = gateway.config().generation_temperature;
  request.user_text = render_synthesis_prompt(concepts, final_prompt, sample);
  const json items = request_json_list(gateway, request);

  std::vector<Candidate> out;
  std::map<int, int> ordinals;
  for (std::size_t k = 0; k < items.size(); ++k) {
    const json& item = items[k];
    const std::string where = "assertion #" + std::to_string(k + 1);
    if (!item.is_object() || !item.contains("spec")) {
      warn(where + " has no spec; skipped");
      continue;
    }
    std::size_t concept_index = 0;
    const json* refs = item.contains("concepts") ? &item["concepts"] : nullptr;
    if (refs && refs->is_array() && !refs->empty()) refs = &(*refs)[0];
    if (refs && refs->is_number_integer()) {
      const auto number = refs->get<long long>();
      if (number >= 1 && static_cast<std::size_t>(number) <= concepts.size()) {
        concept_index = static_cast<std::size_t>(number - 1);
      } else {
        warn(where + " names concept " + std::to_string(number) +
             ", which does not exist; attributed to concept 1");
      }
    }
    Candidate c;
    try {
      c.spec = spec_from_json(item["spec"]);
    } catch (const InvalidSpecError& e) {
      warn(where + " is invalid (" + e.what() + "); skipped");
      continue;
    }
    const CriterionConcept& origin = concepts[concept_index];
    const int ordinal = ++ordinals[origin.delta_version];
    c.delta_version = origin.delta_version;
    c.concept_text = origin.description;
    c.category = origin.category.name;
    c.id = "a" + std::to_string(origin.delta_version) + "_" + std::to_string(ordinal) + "_" +
           name_slug(string_field(item, {"name"}), origin.description);
    c.spec.id = c.id;
    out.push_back(std::move(c));
  }
  if (out.empty()) throw EmptyCandidateSetError("no valid assertion was synthesized");
  return out;
}

CandidateSet generate_candidates(const PromptVersionHistory& history, const ExampleRun& sample,
                                 LlmGateway& gateway, GenerationReport* report,
                                 unsigned threads) {
  const auto deltas = compute_deltas(history);
  struct Slot {
    DeltaOutcome outcome;
    std::vector<Candidate> candidates;
    std::vector<std::string> warnings;
    std::exception_ptr fatal;
  };
  std::vector<Slot> slots(deltas.size());

  auto process = [&](std::size_t d) {
    Slot& slot = slots[d];
    const PromptDelta& delta = deltas[d];
    slot.outcome.delta_version = delta.to_version;
    if (delta.empty()) {
      slot.outcome.error_kind = "EmptyDelta";
      slot.outcome.error = "version is identical to its predecessor";
      return;
    }
    try {
      auto concepts = categorize_delta(delta, gateway);
      slot.outcome.concepts = concepts.size();
      if (concepts.empty()) throw EmptyCandidateSetError("no assertion concepts proposed");
      slot.candidates = synthesize_assertions(concepts, history.latest(), sample, gateway,
                                              &slot.warnings);
      slot.outcome.candidates = slot.candidates.size();
      slot.outcome.skipped_specs = slot.warnings.size();
    } catch (const AuthError&) {
      slot.fatal = std::current_exception();
    } catch (const PreconditionError&) {
      slot.fatal = std::current_exception();
    } catch (const Error& e) {
      slot.outcome.error_kind = e.kind();
      slot.outcome.error = e.what();
      slot.candidates.clear();
      spdlog::warn("delta {} skipped: {}", delta.to_version, e.what());
    }
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(deltas.size())));
  if (threads <= 1) {
    for (std::size_t d = 0; d < deltas.size(); ++d) process(d);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t d = next++; d < deltas.size(); d = next++) process(d);
      });
    }
  }

  CandidateSet set;
  for (auto& slot : slots) {
    if (slot.fatal) std::rethrow_exception(slot.fatal);
    if (report) {
      report->deltas.push_back(slot.outcome);
      for (auto& w : slot.warnings) {
        report->warnings.push_back("delta " + std::to_string(slot.outcome.delta_version) +
                                   ": " + w);
      }
    }
    for (auto& c : slot.candidates) set.candidates.push_back(std::move(c));
  }
  if (set.empty()) throw EmptyCandidateSetError("no delta produced a candidate assertion");
  set.validate();
  return set;
}

}  // namespace deltacheck
