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

#include "deltacheck/taxonomy.hpp"

#include <array>
#include <utility>

#include "deltacheck/errors.hpp"
#include "deltacheck/text.hpp"

namespace deltacheck {
namespace {

constexpr std::array<std::pair<CategoryName, std::string_view>, 10> kNames{{
    {CategoryName::kResponseFormat, "RESPONSE_FORMAT"},
    {CategoryName::kExampleDemonstration, "EXAMPLE_DEMONSTRATION"},
    {CategoryName::kPromptClarification, "PROMPT_CLARIFICATION"},
    {CategoryName::kWorkflowDescription, "WORKFLOW_DESCRIPTION"},
    {CategoryName::kDataIntegration, "DATA_INTEGRATION"},
    {CategoryName::kCount, "COUNT"},
    {CategoryName::kInclusion, "INCLUSION"},
    {CategoryName::kExclusion, "EXCLUSION"},
    {CategoryName::kQualitative, "QUALITATIVE"},
    {CategoryName::kOther, "OTHER"},
}};

// Labels are compared after folding case and dropping everything except
// letters, so "Presentation-Format" and "presentation format" agree.
constexpr std::array<std::pair<std::string_view, CategoryName>, 26> kSynonyms{{
    {"presentationformat", CategoryName::kResponseFormat},
    {"responseformat", CategoryName::kResponseFormat},
    {"responseformatinstruction", CategoryName::kResponseFormat},
    {"format", CategoryName::kResponseFormat},
    {"exampledemonstration", CategoryName::kExampleDemonstration},
    {"example", CategoryName::kExampleDemonstration},
    {"promptclarification", CategoryName::kPromptClarification},
    {"clarification", CategoryName::kPromptClarification},
    {"workflowdescription", CategoryName::kWorkflowDescription},
    {"workflow", CategoryName::kWorkflowDescription},
    {"dataintegration", CategoryName::kDataIntegration},
    {"count", CategoryName::kCount},
    {"quantity", CategoryName::kCount},
    {"quantityinstruction", CategoryName::kCount},
    {"inclusion", CategoryName::kInclusion},
    {"inclusioninstruction", CategoryName::kInclusion},
    {"exclusion", CategoryName::kExclusion},
    {"exclusioninstruction", CategoryName::kExclusion},
    {"qualitative", CategoryName::kQualitative},
    {"qualitativeassessment", CategoryName::kQualitative},
    {"qualitativecriteria", CategoryName::kQualitative},
    {"other", CategoryName::kOther},
    {"structural", CategoryName::kOther},
    {"contentbased", CategoryName::kOther},
    {"responseformatting", CategoryName::kResponseFormat},
    {"length", CategoryName::kCount},
}};

std::string letters_only(std::string_view s) {
  std::string out;
  for (char c : s) {
    char l = text::to_lower(c);
    if (l >= 'a' && l <= 'z') out.push_back(l);
  }
  return out;
}

}  // namespace

DeltaCategory DeltaCategory::of(CategoryName name) {
  const bool structural = name == CategoryName::kResponseFormat ||
                          name == CategoryName::kExampleDemonstration;
  return {name, structural ? CategoryGroup::kStructural : CategoryGroup::kContentBased};
}

std::string_view to_string(CategoryName name) {
  for (const auto& [n, s] : kNames) {
    if (n == name) return s;
  }
  return "OTHER";
}

std::string_view to_string(CategoryGroup group) {
  return group == CategoryGroup::kStructural ? "STRUCTURAL" : "CONTENT_BASED";
}

CategoryName parse_category_name(std::string_view name) {
  for (const auto& [n, s] : kNames) {
    if (s == name) return n;
  }
  throw ValidationError("unknown category '" + std::string(name) + "'");
}

DeltaCategory map_category_label(std::string_view label) {
  const std::string key = letters_only(label);
  for (const auto& [n, s] : kNames) {
    if (letters_only(s) == key) return DeltaCategory::of(n);
  }
  for (const auto& [syn, name] : kSynonyms) {
    if (syn == key) {
      DeltaCategory category = DeltaCategory::of(name);
      if (key == "structural") category.group = CategoryGroup::kStructural;
      return category;
    }
  }
  return DeltaCategory::of(CategoryName::kOther);
}

}  // namespace deltacheck
