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

#ifndef DELTACHECK_TEXT_HPP_
#define DELTACHECK_TEXT_HPP_

#include <string>
#include <string_view>

namespace deltacheck::text {

constexpr bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

constexpr char to_lower(char c) noexcept {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string_view trim(std::string_view s) noexcept;

// ASCII case folding; bytes outside A-Z pass through unchanged.
std::string fold_case(std::string_view s);

// Collapses whitespace runs to one space and trims both ends.
std::string normalize_whitespace(std::string_view s);

// Number of whitespace-delimited tokens.
std::size_t count_words(std::string_view s) noexcept;

// Lowercase [a-z0-9_] identifier derived from free text, at most `max_len`.
std::string slugify(std::string_view s, std::size_t max_len = 40);

}  // namespace deltacheck::text

#endif  // DELTACHECK_TEXT_HPP_
