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

#ifndef FIGCAP_TEXTKIT_H_
#define FIGCAP_TEXTKIT_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace figcap {

// Lowercase tokens, never empty strings.
using TokenSeq = std::vector<std::string>;

// Tokenizes `text`:
//  * ASCII letters are lowercased;
//  * ASCII whitespace and the UTF-8 encodings of Unicode whitespace separate;
//  * a maximal run of ASCII letters/digits and non-ASCII bytes is one token;
//  * every other ASCII character is a token of its own.
// Pure; tokenize(Join(tokenize(s))) == tokenize(s).
TokenSeq Tokenize(std::string_view text);

// Joins tokens with single spaces.
std::string Join(std::span<const std::string> tokens,
                 std::string_view separator = " ");

// Collapses every whitespace run (ASCII or Unicode) into one ASCII space and
// trims both ends.
std::string NormalizeWhitespace(std::string_view text);

struct Chunk {
  std::string text;
  std::size_t index = 0;
  // Half-open byte span into the normalized concatenated paragraph.
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const Chunk&) const = default;
};

// Paragraphs joined by single spaces, whitespace-normalized.
std::string ConcatenateParagraphs(std::span<const std::string> paragraphs);

// Splits the concatenated paragraph into sentence chunks. A boundary is a
// '.', '!' or '?' followed by a space and an uppercase letter or digit,
// except after an abbreviation (initials, dotted forms like "e.g.", and
// short scholarly abbreviations such as "Fig.", "Eq.", "al.").
std::vector<Chunk> SplitChunks(std::span<const std::string> paragraphs);

// Joins chunk texts by single spaces.
std::string JoinChunks(std::span<const Chunk> chunks);

inline constexpr int kMaxNGramOrder = 4;

struct NGramBag {
  int n = 1;
  std::map<std::vector<std::string>, int> counts;

  // Sum of all counts.
  std::size_t Total() const;
};

// Sliding-window n-grams with multiplicity. Throws kInvalidOrder unless
// 1 <= n <= 4.
NGramBag NGrams(std::span<const std::string> tokens, int n);

}  // namespace figcap

#endif  // FIGCAP_TEXTKIT_H_
