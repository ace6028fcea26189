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

#ifndef DELTACHECK_JSON_IO_HPP_
#define DELTACHECK_JSON_IO_HPP_

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace deltacheck {

// Throws IoError when the file cannot be read and ParseError when it is not
// valid JSON.
nlohmann::json read_json_file(const std::filesystem::path& path);

// Writes `doc` with two-space indentation and a trailing newline. Keys of
// nlohmann::json objects are sorted, so output is byte-stable. The write goes
// through a temporary file and a rename.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

std::string sha256_hex(std::string_view data);

}  // namespace deltacheck

#endif  // DELTACHECK_JSON_IO_HPP_
