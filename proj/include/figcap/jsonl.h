// Copyright 2026 The Figcap Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FIGCAP_JSONL_H_
#define FIGCAP_JSONL_H_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace figcap {

// Calls `fn(json, line_number)` for every non-blank line of a JSONL file.
// Line numbers are 1-based. Throws kIo when the file cannot be opened and
// kParse (naming path and line) on malformed JSON.
void ForEachJsonLine(
    const std::filesystem::path& path,
    const std::function<void(const nlohmann::json&, std::size_t)>& fn);

// Writes one compact JSON object per line, creating parent directories.
void WriteJsonLines(const std::filesystem::path& path,
                    const std::vector<nlohmann::ordered_json>& rows);

void WriteJsonFile(const std::filesystem::path& path,
                   const nlohmann::ordered_json& value);

std::string ReadFile(const std::filesystem::path& path);

}  // namespace figcap

#endif  // FIGCAP_JSONL_H_
