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

#include "figcap/prompt.h"

#include <string>
#include <vector>

#include "figcap/error.h"
#include "figcap/textkit.h"

namespace figcap {
namespace {

constexpr std::string_view kOcrHeader = "OCR Text: ";
constexpr std::string_view kMentionsHeader = "\nMentions: ";
constexpr std::string_view kParagraphsHeader = "\nParagraphs: ";

std::size_t Utf8Floor(std::string_view text, std::size_t cut) {
  while (cut > 0 && cut < text.size() &&
         (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) {
    --cut;
  }
  return cut;
}

}  // namespace

std::string_view TemplateName(TemplateId id) {
  return id == TemplateId::kPlain ? "plain" : "instruction";
}

std::optional<TemplateId> ParseTemplateName(std::string_view name) {
  if (name == "plain") return TemplateId::kPlain;
  if (name == "instruction") return TemplateId::kInstruction;
  return std::nullopt;
}

PromptTemplate PromptTemplate::Plain() { return {TemplateId::kPlain, ""}; }

PromptTemplate PromptTemplate::Instruction() {
  return {TemplateId::kInstruction, std::string(kInstructionPreamble)};
}

PromptTemplate PromptTemplate::For(TemplateId id) {
  return id == TemplateId::kPlain ? Plain() : Instruction();
}

PromptText BuildPrompt(std::string_view ocr_text,
                       std::span<const std::string> mentions,
                       std::string_view paragraph,
                       const PromptTemplate& prompt_template,
                       std::size_t max_chars) {
  if (max_chars < kMinPromptChars) {
    throw Error(ErrorCode::kInvalidParameter,
                "max_chars must be at least " +
                    std::to_string(kMinPromptChars));
  }
  std::string prefix = prompt_template.preamble;
  if (!prefix.empty()) prefix.push_back(' ');
  const std::size_t fixed = prefix.size() + kOcrHeader.size() +
                            kMentionsHeader.size() + kParagraphsHeader.size();
  if (fixed > max_chars) {
    throw Error(ErrorCode::kCapacity,
                "max_chars " + std::to_string(max_chars) +
                    " cannot hold the template headers (" +
                    std::to_string(fixed) + " bytes)");
  }

  std::string ocr(ocr_text);
  std::vector<std::string> kept_mentions(mentions.begin(), mentions.end());
  std::string mention_text = Join(kept_mentions, " ");
  std::string para(paragraph);
  bool ocr_cut = false;
  bool mentions_cut = false;
  bool para_cut = false;

  const auto total = [&] {
    return fixed + ocr.size() + mention_text.size() + para.size();
  };

  if (total() > max_chars) {
    para_cut = true;
    const std::vector<Chunk> chunks = SplitChunks(std::span(&para, 1));
    std::string fitted;
    std::string candidate;
    const std::size_t others = total() - para.size();
    const std::size_t budget = others < max_chars ? max_chars - others : 0;
    for (const Chunk& chunk : chunks) {
      if (!candidate.empty()) candidate.push_back(' ');
      candidate.append(chunk.text);
      if (candidate.size() > budget) break;
      fitted = candidate;
    }
    para = std::move(fitted);
  }
  while (total() > max_chars && !kept_mentions.empty()) {
    mentions_cut = true;
    kept_mentions.pop_back();
    mention_text = Join(kept_mentions, " ");
  }
  if (total() > max_chars) {
    ocr_cut = true;
    const std::size_t over = total() - max_chars;
    ocr.resize(Utf8Floor(ocr, ocr.size() - over));
  }

  PromptText prompt;
  prompt.template_id = prompt_template.id;
  std::string& text = prompt.text;
  text.reserve(total());
  text.append(prefix).append(kOcrHeader);
  prompt.ocr = {text.size(), text.size() + ocr.size(), ocr_cut};
  text.append(ocr).append(kMentionsHeader);
  prompt.mentions = {text.size(), text.size() + mention_text.size(),
                     mentions_cut};
  text.append(mention_text).append(kParagraphsHeader);
  prompt.paragraphs = {text.size(), text.size() + para.size(), para_cut};
  text.append(para);
  return prompt;
}

nlohmann::ordered_json PromptToJson(std::string_view record_id,
                                    const PromptText& prompt) {
  nlohmann::ordered_json j;
  j["record_id"] = record_id;
  j["template_id"] = TemplateName(prompt.template_id);
  j["text"] = prompt.text;
  return j;
}

}  // namespace figcap
