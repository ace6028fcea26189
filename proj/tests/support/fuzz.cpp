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

#include "support/fuzz.hpp"

#include <nlohmann/json.hpp>

#include "deltacheck/assertion_engine.hpp"
#include "deltacheck/subsumption.hpp"

namespace deltacheck::testing {

using nlohmann::json;

namespace {

json random_json(Rng& rng, int depth) {
  const int pick = rng.uniform(0, depth > 1 ? 3 : 5);
  switch (pick) {
    case 0: {
      json list = json::array();
      for (int i = rng.uniform(0, 4); i > 0; --i) list.push_back(random_json(rng, depth + 1));
      return list;
    }
    case 1: {
      static const std::vector<std::string> keys = {"a", "b", "c", "apple"};
      json obj = json::object();
      for (int i = rng.uniform(0, 3); i > 0; --i) obj[rng.pick(keys)] = random_json(rng, depth + 1);
      return obj;
    }
    case 2:
      return rng.uniform(-5, 5);
    case 3:
      return rng.chance(0.5) ? json("apple pie") : json("Pie.");
    default:
      return nullptr;
  }
}

std::string random_prose(Rng& rng) {
  static const std::vector<std::string> words = {
      "apple", "Apple", "APPLE", "pie", "Pie", "tart", "pineapple", "apples.", "pie!",
      "ok?",   "a",     "b",     "{",   "[1,", "2]",   "\"a\":",    "yes.",    ""};
  static const std::vector<std::string> gaps = {" ", " ", " ", "\n", "  ", "\t", ". ", "! "};
  std::string out = rng.chance(0.2) ? rng.pick(gaps) : "";
  for (int i = rng.uniform(0, 9); i > 0; --i) {
    out += rng.pick(words);
    out += rng.pick(gaps);
  }
  return out;
}

std::vector<std::string> random_version(Rng& rng) {
  static const std::vector<std::string> pool = {
      "Answer briefly.",   "Use JSON.",    "Be polite!", "Why not?",        "Cite {source}.",
      "List three items.", "Avoid slang.", "Use JSON.",  "Mention {name}.", "Stay on topic."};
  std::vector<std::string> v(static_cast<std::size_t>(rng.uniform(0, 12)));
  for (auto& s : v) s = rng.pick(pool);
  return v;
}

std::string join(Rng& rng, const std::vector<std::string>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    if (!out.empty()) out += rng.chance(0.3) ? "\n" : " ";
    out += s;
  }
  return out;
}

}  // namespace

std::string random_response(Rng& rng) {
  switch (rng.uniform(0, 3)) {
    case 0:
      return random_prose(rng);
    case 1:
      return random_json(rng, 0).dump();
    case 2: {
      std::string s = random_json(rng, 0).dump(rng.chance(0.5) ? 2 : -1);
      return (rng.chance(0.5) ? "  " : "") + s + (rng.chance(0.5) ? "\n" : "");
    }
    default: {
      std::string s = random_json(rng, 0).dump();
      if (!s.empty() && rng.chance(0.5)) s.pop_back();  // truncated
      return rng.pick(std::vector<std::string>{"apple ", "", "Pie. "}) + s;
    }
  }
}

std::vector<AssertionSpec> dsl_catalog() {
  const json fold_apple = {{"literal", "Apple"}, {"fold_case", true}};
  const json field = {{"field", "fruit"}};
  const json field_fold = {{"field", "fruit"}, {"fold_case", true}};
  const json docs[] = {
      {{"kind", "contains_all"}, {"values", {"apple"}}},
      {{"kind", "contains_all"}, {"values", {"apple", "pie"}}},
      {{"kind", "contains_all"}, {"values", {fold_apple}}},
      {{"kind", "contains_all"}, {"values", {fold_apple, "pie"}}},
      {{"kind", "contains_all"}, {"values", {field}}},
      {{"kind", "contains_all"}, {"values", {field, "pie"}}},
      {{"kind", "contains_any"}, {"values", {"apple", "pie"}}},
      {{"kind", "contains_any"}, {"values", {"pie"}}},
      {{"kind", "excludes_all"}, {"values", {"apple"}}},
      {{"kind", "excludes_all"}, {"values", {"apple", "pie"}}},
      {{"kind", "excludes_all"}, {"values", {field_fold}}},
      {{"kind", "excludes_all"}, {"values", {field_fold, "pie"}}},
      {{"kind", "starts_with"}, {"value", "apple"}},
      {{"kind", "word_count"}, {"min", 1}, {"max", 5}},
      {{"kind", "word_count"}, {"max", 3}},
      {{"kind", "word_count"}, {"min", 2}, {"max", 4}},
      {{"kind", "word_count"}, {"min", 0}},
      {{"kind", "sentence_count"}, {"max", 2}},
      {{"kind", "sentence_count"}, {"min", 1}, {"max", 3}},
      {{"kind", "sentence_count"}, {"max", 1}},
      {{"kind", "json_parseable"}},
      {{"kind", "json_parseable"}, {"shape", "list"}},
      {{"kind", "json_parseable"}, {"shape", "object"}},
      {{"kind", "json_list_min_len"}, {"min", 0}},
      {{"kind", "json_list_min_len"}, {"min", 1}},
      {{"kind", "json_list_min_len"}, {"min", 2}},
      {{"kind", "json_list_min_len"}, {"min", 3}},
      {{"kind", "json_required_keys"}, {"keys", {"a"}}},
      {{"kind", "json_required_keys"}, {"keys", {"a", "b"}}},
      {{"kind", "all_of"},
       {"children",
        {{{"kind", "word_count"}, {"max", 3}}, {{"kind", "contains_all"}, {"values", {"apple"}}}}}},
      {{"kind", "all_of"},
       {"children",
        {{{"kind", "json_list_min_len"}, {"min", 2}}, {{"kind", "word_count"}, {"max", 5}}}}},
      {{"kind", "any_of"},
       {"children",
        {{{"kind", "contains_all"}, {"values", {"apple", "pie"}}},
         {{"kind", "contains_all"}, {"values", {"apple"}}}}}},
      {{"kind", "any_of"},
       {"children",
        {{{"kind", "json_parseable"}, {"shape", "list"}},
         {{"kind", "json_parseable"}, {"shape", "object"}}}}},
      {{"kind", "any_of"},
       {"children",
        {{{"kind", "json_list_min_len"}, {"min", 3}},
         {{"kind", "json_required_keys"}, {"keys", {"a", "b"}}}}}},
  };
  std::vector<AssertionSpec> out;
  for (const auto& d : docs) out.push_back(spec_from_json(d));
  return out;
}

FuzzOutcome dsl_soundness_fuzz(int responses, std::uint64_t seed) {
  const auto specs = dsl_catalog();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < specs.size(); ++a) {
    for (std::size_t b = 0; b < specs.size(); ++b) {
      if (a != b && dsl_subsumes(specs[a], specs[b])) pairs.emplace_back(a, b);
    }
  }
  FuzzOutcome outcome;
  outcome.pairs = pairs.size();
  Rng rng(seed);
  static const std::vector<std::string> fruits = {"apple", "Apple", "pie", "", "tart"};
  std::vector<std::uint8_t> pass(specs.size());
  for (int r = 0; r < responses; ++r) {
    ExampleRun e;
    e.id = "fuzz";
    e.input["fruit"] = rng.pick(fruits);
    e.formatted_prompt = "p";
    e.response = random_response(rng);
    for (std::size_t s = 0; s < specs.size(); ++s) {
      pass[s] = evaluate_assertion(specs[s], e, nullptr) ? 1 : 0;
    }
    for (const auto& [a, b] : pairs) {
      if (pass[a] && !pass[b]) {
        if (outcome.witnesses++ == 0) {
          outcome.first_witness = describe(specs[a]) + " => " + describe(specs[b]) +
                                  " refuted by response: " + e.response;
        }
      }
    }
  }
  return outcome;
}

PromptVersionHistory random_history(Rng& rng) {
  PromptVersionHistory h;
  h.versions.push_back({"", 0});
  const int k = rng.uniform(1, 6);
  for (int v = 1; v <= k; ++v) h.versions.push_back({join(rng, random_version(rng)), v});
  return h;
}

}  // namespace deltacheck::testing
