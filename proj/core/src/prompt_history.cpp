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

#include "deltacheck/prompt_history.hpp"

#include <algorithm>
#include <string>

#include "deltacheck/errors.hpp"
#include "deltacheck/json_io.hpp"
#include "deltacheck/text.hpp"

namespace deltacheck {

std::vector<std::string> PromptTemplate::placeholders() const {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string::npos) {
    std::size_t close = text.find_first_of("{}", pos + 1);
    if (close == std::string::npos) break;
    if (text[close] == '{') {
      pos = close;
      continue;
    }
    std::string_view name(text.data() + pos + 1, close - pos - 1);
    bool valid = !name.empty() &&
                 std::none_of(name.begin(), name.end(), text::is_space);
    if (valid) names.emplace_back(name);
    pos = close + 1;
  }
  return names;
}

void PromptVersionHistory::validate() const {
  if (versions.size() < 2) {
    throw ValidationError("a prompt history needs at least one version after P_0");
  }
  for (std::size_t i = 0; i < versions.size(); ++i) {
    if (versions[i].version_index != static_cast<int>(i)) {
      throw VersionGapError("expected version " + std::to_string(i) + ", found " +
                            std::to_string(versions[i].version_index));
    }
  }
  if (!text::trim(versions.front().text).empty()) {
    throw ValidationError("version 0 must be the empty template");
  }
}

std::string_view to_string(DeltaTag tag) {
  return tag == DeltaTag::kAdded ? "ADDED" : "DELETED";
}

std::string PromptDelta::render() const {
  std::string out;
  for (const auto& e : entries) {
    out += e.tag == DeltaTag::kAdded ? "+ " : "- ";
    out += e.sentence;
    out += '\n';
  }
  return out;
}

std::vector<std::string> segment_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    auto piece = text::trim(text.substr(start, end - start));
    if (!piece.empty()) out.emplace_back(piece);
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\n' || c == '\r') {
      flush(i);
      start = i + 1;
    } else if ((c == '.' || c == '!' || c == '?') &&
               (i + 1 == text.size() || text::is_space(text[i + 1]))) {
      flush(i + 1);
    }
  }
  flush(text.size());
  return out;
}

PromptDelta diff_sentences(const std::vector<std::string>& prev,
                           const std::vector<std::string>& next,
                           int from_version, int to_version) {
  const std::size_t n = prev.size();
  const std::size_t m = next.size();
  // lcs[i][j]: LCS length of prev[i..] and next[j..].
  std::vector<std::vector<std::size_t>> lcs(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      lcs[i][j] = prev[i] == next[j] ? lcs[i + 1][j + 1] + 1
                                     : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }

  PromptDelta delta{from_version, to_version, {}};
  std::vector<DeltaEntry> added;
  auto flush_gap = [&] {
    for (auto& a : added) delta.entries.push_back(std::move(a));
    added.clear();
  };

  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && prev[i] == next[j]) {
      flush_gap();
      ++i;
      ++j;
    } else if (j == m || (i < n && lcs[i + 1][j] >= lcs[i][j + 1])) {
      delta.entries.push_back({DeltaTag::kDeleted, prev[i], i});
      ++i;
    } else {
      added.push_back({DeltaTag::kAdded, next[j], j});
      ++j;
    }
  }
  flush_gap();
  return delta;
}

PromptDelta compute_delta(const PromptTemplate& prev, const PromptTemplate& next) {
  if (next.version_index != prev.version_index + 1) {
    throw VersionGapError("cannot diff version " + std::to_string(prev.version_index) +
                          " against version " + std::to_string(next.version_index));
  }
  return diff_sentences(segment_sentences(prev.text), segment_sentences(next.text),
                        prev.version_index, next.version_index);
}

std::vector<PromptDelta> compute_deltas(const PromptVersionHistory& history) {
  history.validate();
  std::vector<PromptDelta> deltas;
  deltas.reserve(history.versions.size() - 1);
  for (std::size_t i = 1; i < history.versions.size(); ++i) {
    deltas.push_back(compute_delta(history.versions[i - 1], history.versions[i]));
  }
  return deltas;
}

std::vector<std::string> apply_delta(const std::vector<std::string>& prev,
                                     const PromptDelta& delta) {
  std::vector<bool> deleted(prev.size(), false);
  std::vector<const DeltaEntry*> added;
  for (const auto& e : delta.entries) {
    if (e.tag == DeltaTag::kDeleted) {
      if (e.position >= prev.size() || prev[e.position] != e.sentence ||
          deleted[e.position]) {
        throw ValidationError("deleted sentence does not match predecessor: " +
                              e.sentence);
      }
      deleted[e.position] = true;
    } else {
      added.push_back(&e);
    }
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < prev.size(); ++i) {
    if (!deleted[i]) out.push_back(prev[i]);
  }
  std::stable_sort(added.begin(), added.end(),
                   [](const DeltaEntry* a, const DeltaEntry* b) {
                     return a->position < b->position;
                   });
  for (const DeltaEntry* a : added) {
    if (a->position > out.size()) {
      throw ValidationError("added sentence position out of range: " + a->sentence);
    }
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(a->position), a->sentence);
  }
  return out;
}

PromptVersionHistory history_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("versions") || !doc["versions"].is_array()) {
    throw ParseError("history document needs a \"versions\" array");
  }
  PromptVersionHistory history;
  for (const auto& v : doc["versions"]) {
    if (!v.is_object() || !v.contains("version") || !v["version"].is_number_integer() ||
        !v.contains("text") || !v["text"].is_string()) {
      throw ParseError("each version needs an integer \"version\" and a string \"text\"");
    }
    history.versions.push_back({v["text"].get<std::string>(), v["version"].get<int>()});
  }
  if (!history.versions.empty() && history.versions.front().version_index == 1) {
    history.versions.insert(history.versions.begin(), PromptTemplate{"", 0});
  }
  history.validate();
  return history;
}

nlohmann::json history_to_json(const PromptVersionHistory& history) {
  nlohmann::json versions = nlohmann::json::array();
  for (const auto& v : history.versions) {
    versions.push_back({{"version", v.version_index}, {"text", v.text}});
  }
  return {{"versions", std::move(versions)}};
}

PromptVersionHistory load_history(const std::filesystem::path& path) {
  return history_from_json(read_json_file(path));
}

}  // namespace deltacheck
