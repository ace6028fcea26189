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

#ifndef DELTACHECK_TAXONOMY_HPP_
#define DELTACHECK_TAXONOMY_HPP_

#include <string>
#include <string_view>

namespace deltacheck {

enum class CategoryName {
  kResponseFormat,
  kExampleDemonstration,
  kPromptClarification,
  kWorkflowDescription,
  kDataIntegration,
  kCount,
  kInclusion,
  kExclusion,
  kQualitative,
  kOther,
};

enum class CategoryGroup { kStructural, kContentBased };

struct DeltaCategory {
  CategoryName name = CategoryName::kOther;
  CategoryGroup group = CategoryGroup::kContentBased;

  // Canonical group for `name`. Other defaults to content-based.
  static DeltaCategory of(CategoryName name);

  friend bool operator==(const DeltaCategory&, const DeltaCategory&) = default;
};

std::string_view to_string(CategoryName name);    // "RESPONSE_FORMAT", ...
std::string_view to_string(CategoryGroup group);  // "STRUCTURAL", ...

// Parses the canonical enum spelling; throws ValidationError otherwise.
CategoryName parse_category_name(std::string_view name);

// Maps a free-form label from a model reply ("Presentation Format",
// "Quantity Instruction", "Qualitative Assessment", ...) onto the taxonomy.
// Unrecognized labels become Other.
DeltaCategory map_category_label(std::string_view label);

}  // namespace deltacheck

#endif  // DELTACHECK_TAXONOMY_HPP_
