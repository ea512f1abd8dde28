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

#include <cmath>
#include <limits>
#include <set>

#include "figcap/jsonl.h"
#include "figcap/pipeline.h"

namespace figcap {
namespace {

[[noreturn]] void ConfigError(const std::string& message) {
  throw Error(ErrorCode::kConfig, message);
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

class TomlLine {
 public:
  TomlLine(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  nlohmann::json Value() {
    SkipSpace();
    if (pos_ >= text_.size()) Fail("missing value");
    const char c = text_[pos_];
    if (c == '"') return BasicString();
    if (c == '\'') return LiteralString();
    if (c == '[') return Array();
    return Scalar();
  }

  void ExpectEnd() {
    SkipSpace();
    if (pos_ < text_.size() && text_[pos_] != '#') Fail("trailing characters");
  }

 private:
  [[noreturn]] void Fail(const std::string& what) const {
    ConfigError("TOML line " + std::to_string(line_) + ": " + what);
  }

  void SkipSpace() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) {
      ++pos_;
    }
  }

  nlohmann::json BasicString() {
    std::string out;
    ++pos_;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_++];
      if (c == '\\') {
        if (pos_ >= text_.size()) Fail("dangling escape");
        const char e = text_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case 'r': c = '\r'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: Fail(std::string("unsupported escape \\") + e);
        }
      }
      out.push_back(c);
    }
    if (pos_ >= text_.size()) Fail("unterminated string");
    ++pos_;
    return out;
  }

  nlohmann::json LiteralString() {
    const auto end = text_.find('\'', pos_ + 1);
    if (end == std::string_view::npos) Fail("unterminated string");
    std::string out(text_.substr(pos_ + 1, end - pos_ - 1));
    pos_ = end + 1;
    return out;
  }

  nlohmann::json Array() {
    nlohmann::json out = nlohmann::json::array();
    ++pos_;
    while (true) {
      SkipSpace();
      if (pos_ >= text_.size()) Fail("unterminated array");
      if (text_[pos_] == ']') {
        ++pos_;
        return out;
      }
      out.push_back(Value());
      SkipSpace();
      if (pos_ < text_.size() && text_[pos_] == ',') ++pos_;
    }
  }

  nlohmann::json Scalar() {
    const auto end = text_.find_first_of(",]# \t", pos_);
    const std::string token(
        text_.substr(pos_, end == std::string_view::npos ? end : end - pos_));
    pos_ = end == std::string_view::npos ? text_.size() : end;
    if (token == "true") return true;
    if (token == "false") return false;
    if (token == "inf" || token == "+inf") {
      return std::numeric_limits<double>::infinity();
    }
    std::string digits;
    for (char c : token) {
      if (c != '_') digits.push_back(c);
    }
    const bool is_float =
        digits.find_first_of(".eE") != std::string::npos;
    try {
      std::size_t used = 0;
      if (is_float) {
        const double v = std::stod(digits, &used);
        if (used == digits.size()) return v;
      } else {
        const long long v = std::stoll(digits, &used);
        if (used == digits.size()) return v;
      }
    } catch (const std::exception&) {
    }
    Fail("cannot parse value '" + token + "'");
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::vector<std::string> StringList(const nlohmann::json& value,
                                    const std::string& field) {
  if (value.is_null()) return {};
  if (value.is_string()) return {value.get<std::string>()};
  if (!value.is_array()) {
    throw Error(ErrorCode::kParse,
                "field '" + field + "' must be a string or list of strings");
  }
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string()) {
      throw Error(ErrorCode::kParse,
                  "field '" + field + "' contains a non-string element");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

std::string_view FilterModeName(FilterMode mode) {
  switch (mode) {
    case FilterMode::kOracle: return "oracle";
    case FilterMode::kExternal: return "external";
    case FilterMode::kOff: return "off";
  }
  return "off";
}

std::optional<FilterMode> ParseFilterMode(std::string_view name) {
  if (name == "oracle") return FilterMode::kOracle;
  if (name == "external") return FilterMode::kExternal;
  if (name == "off") return FilterMode::kOff;
  return std::nullopt;
}

void ValidateConfig(const PipelineConfig& config) {
  if (!(config.lambda >= 0.0)) ConfigError("lambda must be >= 0");
  if (config.max_prompt_chars < kMinPromptChars) {
    ConfigError("max_prompt_chars must be >= 64");
  }
  if (config.filter_mode == FilterMode::kExternal && !config.scorer_endpoint) {
    ConfigError("external filter mode requires a scorer endpoint");
  }
  if (config.parallelism < 1) ConfigError("parallelism must be >= 1");
  if (config.samples_per_prompt < 1) {
    ConfigError("samples_per_prompt must be >= 1");
  }
  if (config.client.max_retries < 0) ConfigError("max_retries must be >= 0");
  if (config.client.timeout.count() <= 0) ConfigError("timeout must be > 0");
}

void ApplyConfigJson(const nlohmann::json& json, PipelineConfig& config) {
  if (!json.is_object()) ConfigError("config must be an object");
  static const std::set<std::string> kKnown = {
      "lambda",         "template",       "max_prompt_chars", "filter_mode",
      "scorer_endpoint", "parallelism",   "seed",             "alpha",
      "beta",           "k",              "scorer_corpus",    "samples_per_prompt",
      "generator_model", "timeout_ms",    "max_retries",      "field_map"};
  try {
    for (const auto& [key, value] : json.items()) {
      if (!kKnown.contains(key)) ConfigError("unknown config key '" + key + "'");
    }
    if (json.contains("lambda")) {
      config.lambda = json["lambda"].is_null()
                          ? std::numeric_limits<double>::infinity()
                          : json["lambda"].get<double>();
    }
    if (json.contains("template")) {
      const auto id = ParseTemplateName(json["template"].get<std::string>());
      if (!id) ConfigError("template must be 'plain' or 'instruction'");
      config.template_id = *id;
    }
    if (json.contains("max_prompt_chars")) {
      const auto v = json["max_prompt_chars"].get<long long>();
      if (v < 0) ConfigError("max_prompt_chars must be positive");
      config.max_prompt_chars = static_cast<std::size_t>(v);
    }
    if (json.contains("filter_mode")) {
      const auto mode = ParseFilterMode(json["filter_mode"].get<std::string>());
      if (!mode) ConfigError("filter_mode must be oracle, external or off");
      config.filter_mode = *mode;
    }
    if (json.contains("scorer_endpoint")) {
      config.scorer_endpoint = json["scorer_endpoint"].get<std::string>();
    }
    if (json.contains("parallelism")) {
      config.parallelism = json["parallelism"].get<int>();
    }
    if (json.contains("seed")) config.seed = json["seed"].get<int>();
    if (json.contains("alpha")) config.alpha = json["alpha"].get<double>();
    if (json.contains("beta")) config.beta = json["beta"].get<double>();
    if (json.contains("k")) config.k = json["k"].get<double>();
    if (json.contains("scorer_corpus")) {
      config.scorer_corpus = json["scorer_corpus"].get<std::string>();
    }
    if (json.contains("samples_per_prompt")) {
      config.samples_per_prompt = json["samples_per_prompt"].get<int>();
    }
    if (json.contains("generator_model")) {
      config.generator_model = json["generator_model"].get<std::string>();
    }
    if (json.contains("timeout_ms")) {
      config.client.timeout =
          std::chrono::milliseconds(json["timeout_ms"].get<long long>());
    }
    if (json.contains("max_retries")) {
      config.client.max_retries = json["max_retries"].get<int>();
    }
    if (json.contains("field_map")) {
      const auto& map = json["field_map"];
      FieldMap& f = config.field_map;
      for (auto [key, target] :
           {std::pair<const char*, std::string*>{"record_id", &f.record_id},
            {"ocr_text", &f.ocr_text},
            {"mentions", &f.mentions},
            {"paragraphs", &f.paragraphs},
            {"gold_caption", &f.gold_caption}}) {
        if (map.contains(key)) *target = map[key].get<std::string>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    ConfigError(std::string("bad config value: ") + e.what());
  }
}

nlohmann::json ParseTomlSubset(std::string_view text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* table = &root;
  std::size_t line_number = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = Trim(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_number;
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      const auto close = line.find(']');
      if (close == std::string_view::npos) {
        ConfigError("TOML line " + std::to_string(line_number) +
                    ": unterminated table header");
      }
      const std::string name(Trim(line.substr(1, close - 1)));
      table = &root[name];
      if (!table->is_object()) *table = nlohmann::json::object();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      ConfigError("TOML line " + std::to_string(line_number) +
                  ": expected key = value");
    }
    std::string key(Trim(line.substr(0, eq)));
    if (key.size() >= 2 && key.front() == '"' && key.back() == '"') {
      key = key.substr(1, key.size() - 2);
    }
    TomlLine parser(line.substr(eq + 1), line_number);
    (*table)[key] = parser.Value();
    parser.ExpectEnd();
  }
  return root;
}

PipelineConfig LoadConfig(const std::filesystem::path& path) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const Error& e) {
    ConfigError(e.what());
  }
  nlohmann::json json;
  if (path.extension() == ".toml") {
    json = ParseTomlSubset(text);
  } else {
    try {
      json = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      ConfigError(path.string() + ": " + e.what());
    }
  }
  PipelineConfig config;
  ApplyConfigJson(json, config);
  return config;
}

Record RecordFromJson(const nlohmann::json& json, const FieldMap& fields) {
  if (!json.is_object()) {
    throw Error(ErrorCode::kParse, "record is not a JSON object");
  }
  Record record;
  const auto id = json.find(fields.record_id);
  if (id == json.end() || !id->is_string() || id->get<std::string>().empty()) {
    throw Error(ErrorCode::kParse,
                "missing or empty '" + fields.record_id + "'");
  }
  record.record_id = id->get<std::string>();
  if (const auto it = json.find(fields.ocr_text); it != json.end()) {
    if (!it->is_string() && !it->is_null()) {
      throw Error(ErrorCode::kParse,
                  "field '" + fields.ocr_text + "' must be a string");
    }
    if (it->is_string()) record.ocr_text = it->get<std::string>();
  }
  if (const auto it = json.find(fields.mentions); it != json.end()) {
    record.mentions = StringList(*it, fields.mentions);
  }
  if (const auto it = json.find(fields.paragraphs); it != json.end()) {
    record.paragraphs = StringList(*it, fields.paragraphs);
  }
  if (const auto it = json.find(fields.gold_caption);
      it != json.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw Error(ErrorCode::kParse,
                  "field '" + fields.gold_caption + "' must be a string");
    }
    record.gold_caption = it->get<std::string>();
  }
  return record;
}

std::vector<Record> LoadRecords(const std::filesystem::path& path,
                                const FieldMap& fields) {
  std::vector<Record> records;
  std::set<std::string> ids;
  ForEachJsonLine(path, [&](const nlohmann::json& json, std::size_t line) {
    const std::string where = path.string() + ":" + std::to_string(line);
    Record record;
    try {
      record = RecordFromJson(json, fields);
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
    if (!ids.insert(record.record_id).second) {
      throw Error(ErrorCode::kDuplicateRecord,
                  where + ": duplicate record_id " + record.record_id);
    }
    records.push_back(std::move(record));
  });
  return records;
}

}  // namespace figcap
