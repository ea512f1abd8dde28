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

#ifndef FIGCAP_PIPELINE_H_
#define FIGCAP_PIPELINE_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "figcap/ensemble.h"
#include "figcap/error.h"
#include "figcap/filter.h"
#include "figcap/metrics.h"
#include "figcap/prompt.h"
#include "figcap/scorer_client.h"
#include "json.hpp"

namespace figcap {

struct Record {
  std::string record_id;
  std::string ocr_text;
  std::vector<std::string> mentions;
  std::vector<std::string> paragraphs;
  std::optional<std::string> gold_caption;
};

// Dataset field names for each Record member.
struct FieldMap {
  std::string record_id = "record_id";
  std::string ocr_text = "ocr_text";
  std::string mentions = "mentions";
  std::string paragraphs = "paragraphs";
  std::string gold_caption = "gold_caption";
};

enum class FilterMode { kOracle, kExternal, kOff };

std::string_view FilterModeName(FilterMode mode);
std::optional<FilterMode> ParseFilterMode(std::string_view name);

struct PipelineConfig {
  double lambda = kDefaultLambda;
  TemplateId template_id = TemplateId::kPlain;
  std::size_t max_prompt_chars = 4096;
  FilterMode filter_mode = FilterMode::kOff;
  std::optional<std::string> scorer_endpoint;
  int parallelism = 1;
  int seed = 0;

  // Built-in cache scorer used in oracle mode.
  double alpha = 0.5;
  double beta = 1.0;
  double k = 1.0;
  // Plain-text corpus (one document per line) for the cache scorer. When
  // unset the scorer is fitted on the input records themselves.
  std::optional<std::filesystem::path> scorer_corpus;

  // Remote generation, used when no candidate files are given.
  int samples_per_prompt = 16;
  std::string generator_model = "remote";

  ClientOptions client;
  FieldMap field_map;
};

// Throws kConfig on invariant violations (external mode without endpoint,
// parallelism < 1, negative lambda, and so on).
void ValidateConfig(const PipelineConfig& config);

// Applies the keys present in `json` on top of `config`.
void ApplyConfigJson(const nlohmann::json& json, PipelineConfig& config);

// Reads a JSON or (by .toml extension) TOML config file.
PipelineConfig LoadConfig(const std::filesystem::path& path);

// Flat TOML subset: key = value pairs, one level of [tables], strings,
// numbers, booleans, inf/nan and single-line arrays. Throws kConfig.
nlohmann::json ParseTomlSubset(std::string_view text);

Record RecordFromJson(const nlohmann::json& json, const FieldMap& fields);

// JSONL loader. Throws kParse naming the line for malformed or incomplete
// lines and kDuplicateRecord for a repeated record_id.
std::vector<Record> LoadRecords(const std::filesystem::path& path,
                                const FieldMap& fields = {});

// Mention sentences joined by single spaces.
std::string MentionText(const Record& record);

struct RecordOutcome {
  std::string record_id;
  std::optional<Error> error;

  std::optional<FilterResult> filter;
  std::string paragraph;  // text handed to the prompt builder
  std::optional<PromptText> prompt;
  std::vector<Candidate> generated;  // only when produced remotely
  std::optional<ConsensusResult> selection;
  std::optional<MetricReport> metrics;

  bool ok() const { return !error.has_value(); }
};

struct PipelineResult {
  std::vector<RecordOutcome> outcomes;  // input order
  std::optional<MetricReport> corpus;   // over records with gold captions
  std::size_t succeeded = 0;
  std::size_t failed = 0;
};

// Last stage to run; evaluation follows selection whenever a gold caption
// is present.
enum class Stage { kFilter, kPrompt, kSelect };

// Stage inputs that are fixed for a whole run.
struct PipelineInputs {
  std::shared_ptr<const LikelihoodModel> filter_model;  // null when off
  std::optional<std::map<std::string, CandidatePool>> pools;
};

// Builds the likelihood model for the configured filter mode: a cache
// scorer fitted on the scorer corpus (or the records) in oracle mode, the
// remote client in external mode, nothing when filtering is off.
std::shared_ptr<const LikelihoodModel> MakeFilterModel(
    const PipelineConfig& config, std::span<const Record> records);

// Throws kConfig when `last_stage` is kSelect and there is neither a
// candidate file nor an endpoint to generate from.
PipelineInputs PrepareInputs(
    const PipelineConfig& config, std::span<const Record> records,
    std::span<const std::filesystem::path> candidate_files,
    Stage last_stage = Stage::kSelect);

// filter -> prompt -> candidates -> select -> evaluate, per record, with up
// to config.parallelism records in flight. A failing record is reported in
// its outcome and never aborts the batch.
PipelineResult RunPipeline(const PipelineConfig& config,
                           std::span<const Record> records,
                           const PipelineInputs& inputs,
                           Stage last_stage = Stage::kSelect);

PipelineResult RunPipeline(
    const PipelineConfig& config, std::span<const Record> records,
    std::span<const std::filesystem::path> candidate_files);

// Writes chunks.jsonl, filtered.jsonl, prompts.jsonl, candidates.jsonl (when
// generated remotely), selected.jsonl, metrics.jsonl, errors.jsonl and
// report.json under `dir`, each keyed by record_id in input order.
void WriteStageOutputs(const PipelineResult& result,
                       const PipelineConfig& config,
                       const std::filesystem::path& dir);

nlohmann::ordered_json FilteredToJson(std::string_view record_id,
                                      const FilteredParagraph& paragraph);

struct SweepRow {
  double lambda = 0.0;
  double kept_fraction = 1.0;
  std::optional<MetricReport> corpus;
  std::size_t failed = 0;
};

// Mean fraction of chunks kept, over records that produced chunks (1.0 when
// none did).
double KeptFraction(const PipelineResult& result);

// One pipeline run per lambda. Requires oracle or external filter mode.
std::vector<SweepRow> SweepLambda(
    const PipelineConfig& config, std::span<const Record> records,
    std::span<const std::filesystem::path> candidate_files,
    std::span<const double> lambdas);

nlohmann::ordered_json SweepRowToJson(const SweepRow& row);

}  // namespace figcap

#endif  // FIGCAP_PIPELINE_H_
