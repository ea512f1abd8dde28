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

#ifndef FIGCAP_PROMPT_H_
#define FIGCAP_PROMPT_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "json.hpp"

namespace figcap {

enum class TemplateId { kPlain, kInstruction };

std::string_view TemplateName(TemplateId id);
// Accepts "plain" or "instruction"; nullopt otherwise.
std::optional<TemplateId> ParseTemplateName(std::string_view name);

struct PromptTemplate {
  TemplateId id = TemplateId::kPlain;
  std::string preamble;

  static PromptTemplate Plain();
  static PromptTemplate Instruction();
  static PromptTemplate For(TemplateId id);
};

inline constexpr std::string_view kInstructionPreamble =
    "Summarize the following OCR text, mentions, and paragraphs, extracting "
    "key information and generating a concise summary.";

// Byte span of one section's content within the rendered text.
struct SectionSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool truncated = false;
};

struct PromptText {
  std::string text;
  TemplateId template_id = TemplateId::kPlain;
  SectionSpan ocr;
  SectionSpan mentions;
  SectionSpan paragraphs;
};

inline constexpr std::size_t kMinPromptChars = 64;

// Renders "[preamble ]OCR Text: {ocr}\nMentions: {mentions}\nParagraphs:
// {paragraph}" with mentions joined by single spaces. When the result would
// exceed `max_chars` bytes, sections are shortened from the last one
// backwards: the paragraph down to the longest chunk prefix that fits, then
// whole mentions, then the OCR text at a UTF-8 boundary.
//
// Throws kInvalidParameter when max_chars < 64 and kCapacity when the
// preamble and headers alone do not fit.
PromptText BuildPrompt(std::string_view ocr_text,
                       std::span<const std::string> mentions,
                       std::string_view paragraph,
                       const PromptTemplate& prompt_template,
                       std::size_t max_chars);

// {record_id, template_id, text}
nlohmann::ordered_json PromptToJson(std::string_view record_id,
                                    const PromptText& prompt);

}  // namespace figcap

#endif  // FIGCAP_PROMPT_H_
