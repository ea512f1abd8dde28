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

#include "figcap/textkit.h"

#include <algorithm>
#include <array>
#include <string>

#include "figcap/error.h"

namespace figcap {
namespace {

bool IsAsciiSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' ||
         c == '\r';
}

bool IsAsciiAlnum(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9');
}

bool IsAsciiAlpha(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

char ToLowerAscii(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

// Byte length of the whitespace sequence starting at text[i], 0 if none.
std::size_t WhitespaceLength(std::string_view text, std::size_t i) {
  const auto at = [&](std::size_t k) -> unsigned char {
    return i + k < text.size() ? static_cast<unsigned char>(text[i + k]) : 0;
  };
  const unsigned char c0 = at(0);
  if (IsAsciiSpace(c0)) return 1;
  if (c0 < 0x80) return 0;
  const unsigned char c1 = at(1);
  if (c0 == 0xC2 && (c1 == 0x85 || c1 == 0xA0)) return 2;
  const unsigned char c2 = at(2);
  if (c0 == 0xE1 && c1 == 0x9A && c2 == 0x80) return 3;  // U+1680
  if (c0 == 0xE2 && c1 == 0x80 &&
      ((c2 >= 0x80 && c2 <= 0x8A) || c2 == 0xA8 || c2 == 0xA9 || c2 == 0xAF)) {
    return 3;
  }
  if (c0 == 0xE2 && c1 == 0x81 && c2 == 0x9F) return 3;  // U+205F
  if (c0 == 0xE3 && c1 == 0x80 && c2 == 0x80) return 3;  // U+3000
  return 0;
}

bool IsWordByte(unsigned char c) { return IsAsciiAlnum(c) || c >= 0x80; }

constexpr std::array<std::string_view, 33> kAbbreviations = {
    "al",   "app",  "approx", "ca",   "cf",  "ch",  "cor", "def", "dr",
    "eq",   "eqs",  "fig",    "figs", "lem", "mr",  "mrs", "ms",  "no",
    "nos",  "pp",   "prof",   "prop", "ref", "refs", "resp", "sec", "secs",
    "st",   "tab",  "thm",    "viz",  "vol", "vs"};

// True when the '.' at text[dot] terminates an abbreviation.
bool EndsAbbreviation(std::string_view text, std::size_t dot) {
  std::size_t start = text.rfind(' ', dot);
  start = (start == std::string_view::npos) ? 0 : start + 1;
  std::string_view word = text.substr(start, dot - start);
  while (!word.empty() && !IsAsciiAlnum(static_cast<unsigned char>(word[0])) &&
         static_cast<unsigned char>(word[0]) < 0x80) {
    word.remove_prefix(1);
  }
  if (word.empty()) return false;
  if (!IsAsciiAlpha(static_cast<unsigned char>(word.back()))) return false;
  if (word.size() == 1) return true;  // initial
  bool has_dot = false;
  bool letters_and_dots = true;
  for (char c : word) {
    if (c == '.') {
      has_dot = true;
    } else if (!IsAsciiAlpha(static_cast<unsigned char>(c))) {
      letters_and_dots = false;
    }
  }
  if (has_dot && letters_and_dots) return true;  // e.g, i.e, U.S
  std::string lowered(word);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(), ToLowerAscii);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lowered) !=
         kAbbreviations.end();
}

bool IsBoundary(std::string_view text, std::size_t i) {
  const char c = text[i];
  if (c != '.' && c != '!' && c != '?') return false;
  if (i + 2 >= text.size() || text[i + 1] != ' ') return false;
  const auto next = static_cast<unsigned char>(text[i + 2]);
  if (!((next >= 'A' && next <= 'Z') || (next >= '0' && next <= '9'))) {
    return false;
  }
  return c != '.' || !EndsAbbreviation(text, i);
}

}  // namespace

TokenSeq Tokenize(std::string_view text) {
  TokenSeq tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (const std::size_t ws = WhitespaceLength(text, i); ws > 0) {
      i += ws;
      continue;
    }
    const auto c = static_cast<unsigned char>(text[i]);
    if (!IsWordByte(c)) {
      tokens.emplace_back(1, text[i]);
      ++i;
      continue;
    }
    std::string word;
    while (i < text.size() && IsWordByte(static_cast<unsigned char>(text[i])) &&
           WhitespaceLength(text, i) == 0) {
      word.push_back(ToLowerAscii(text[i]));
      ++i;
    }
    tokens.push_back(std::move(word));
  }
  return tokens;
}

std::string Join(std::span<const std::string> tokens,
                 std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.append(separator);
    out.append(tokens[i]);
  }
  return out;
}

std::string NormalizeWhitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < text.size()) {
    if (const std::size_t ws = WhitespaceLength(text, i); ws > 0) {
      pending_space = !out.empty();
      i += ws;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

std::string ConcatenateParagraphs(std::span<const std::string> paragraphs) {
  return NormalizeWhitespace(Join(paragraphs, " "));
}

std::vector<Chunk> SplitChunks(std::span<const std::string> paragraphs) {
  const std::string text = ConcatenateParagraphs(paragraphs);
  std::vector<Chunk> chunks;
  std::size_t start = 0;
  const auto emit = [&](std::size_t end) {
    chunks.push_back(Chunk{text.substr(start, end - start), chunks.size(),
                           start, end});
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (IsBoundary(text, i)) {
      emit(i + 1);
      start = i + 2;
    }
  }
  if (start < text.size()) emit(text.size());
  return chunks;
}

std::string JoinChunks(std::span<const Chunk> chunks) {
  std::string out;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out.append(chunks[i].text);
  }
  return out;
}

std::size_t NGramBag::Total() const {
  std::size_t total = 0;
  for (const auto& [gram, count] : counts) total += count;
  return total;
}

NGramBag NGrams(std::span<const std::string> tokens, int n) {
  if (n < 1 || n > kMaxNGramOrder) {
    throw Error(ErrorCode::kInvalidOrder,
                "n-gram order must be in [1, 4], got " + std::to_string(n));
  }
  NGramBag bag;
  bag.n = n;
  const auto order = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    ++bag.counts[std::vector<std::string>(tokens.begin() + i,
                                          tokens.begin() + i + order)];
  }
  return bag;
}

}  // namespace figcap
