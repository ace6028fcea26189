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

#ifndef DELTACHECK_PROMPT_HISTORY_HPP_
#define DELTACHECK_PROMPT_HISTORY_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace deltacheck {

// One version of a prompt template. Version 0 is always the empty template.
struct PromptTemplate {
  std::string text;
  int version_index = 0;

  // Brace-delimited placeholder names in order of appearance, e.g. the
  // "movie_info" in "{movie_info}". A brace group containing whitespace or
  // nothing is literal text, not a placeholder.
  std::vector<std::string> placeholders() const;
};

struct PromptVersionHistory {
  std::vector<PromptTemplate> versions;

  // Throws ValidationError unless indices are exactly 0..k with k >= 1 and
  // version 0 is empty.
  void validate() const;
  const PromptTemplate& latest() const { return versions.back(); }
};

enum class DeltaTag { kAdded, kDeleted };

std::string_view to_string(DeltaTag tag);

struct DeltaEntry {
  DeltaTag tag = DeltaTag::kAdded;
  std::string sentence;
  // Index of the sentence in the previous version (kDeleted) or in the next
  // version (kAdded).
  std::size_t position = 0;

  friend bool operator==(const DeltaEntry&, const DeltaEntry&) = default;
};

struct PromptDelta {
  int from_version = 0;
  int to_version = 1;
  std::vector<DeltaEntry> entries;

  bool empty() const { return entries.empty(); }
  // "+ sentence" / "- sentence" lines, one per entry.
  std::string render() const;
};

// Splits on '.', '!' or '?' followed by whitespace or end of text, and on
// newlines. Every sentence is trimmed; empty pieces are dropped.
std::vector<std::string> segment_sentences(std::string_view text);

// Sentence-level LCS diff between two sentence lists. Within each unaligned
// gap the deleted sentences precede the added ones.
PromptDelta diff_sentences(const std::vector<std::string>& prev,
                           const std::vector<std::string>& next,
                           int from_version, int to_version);

// Throws VersionGapError unless next.version_index == prev.version_index + 1.
PromptDelta compute_delta(const PromptTemplate& prev, const PromptTemplate& next);

// Deltas 1..k of a validated history.
std::vector<PromptDelta> compute_deltas(const PromptVersionHistory& history);

// Rebuilds the successor sentence list from the predecessor and a delta.
// Throws ValidationError when the delta does not fit `prev`.
std::vector<std::string> apply_delta(const std::vector<std::string>& prev,
                                     const PromptDelta& delta);

PromptVersionHistory history_from_json(const nlohmann::json& doc);
nlohmann::json history_to_json(const PromptVersionHistory& history);
PromptVersionHistory load_history(const std::filesystem::path& path);

}  // namespace deltacheck

#endif  // DELTACHECK_PROMPT_HISTORY_HPP_
