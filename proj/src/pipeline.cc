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

#include "figcap/pipeline.h"

#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "figcap/jsonl.h"
#include "figcap/textkit.h"

namespace figcap {
namespace {

struct RunContext {
  const PipelineConfig& config;
  const PipelineInputs& inputs;
  Stage last_stage;
  PromptTemplate prompt_template;
};

RecordOutcome ProcessRecord(const RunContext& ctx, const Record& record) {
  const PipelineConfig& config = ctx.config;
  RecordOutcome out;
  out.record_id = record.record_id;
  try {
    const std::string mention = MentionText(record);
    if (config.filter_mode == FilterMode::kOff) {
      out.paragraph = ConcatenateParagraphs(record.paragraphs);
    } else {
      if (!record.gold_caption || Tokenize(*record.gold_caption).empty()) {
        throw Error(ErrorCode::kInvalidOutput,
                    "filter mode " +
                        std::string(FilterModeName(config.filter_mode)) +
                        " needs a non-empty gold caption");
      }
      out.filter = FilterParagraph(*ctx.inputs.filter_model, record.paragraphs,
                                   mention, *record.gold_caption,
                                   config.lambda);
      out.paragraph = out.filter->paragraph.text;
    }
    if (ctx.last_stage == Stage::kFilter) return out;

    out.prompt = BuildPrompt(record.ocr_text, record.mentions, out.paragraph,
                             ctx.prompt_template, config.max_prompt_chars);
    if (ctx.last_stage == Stage::kPrompt) return out;

    CandidatePool pool;
    pool.record_id = record.record_id;
    if (ctx.inputs.pools) {
      const auto it = ctx.inputs.pools->find(record.record_id);
      if (it == ctx.inputs.pools->end()) {
        throw Error(ErrorCode::kMissingRecord,
                    "no candidates for record " + record.record_id);
      }
      pool = it->second;
    } else {
      const GenerateRequest request{record.record_id, out.prompt->text};
      auto generated = GenerateBatch(
          *config.scorer_endpoint, std::span(&request, 1),
          config.samples_per_prompt, config.seed, config.generator_model,
          config.client);
      pool.candidates = generated.front();
      out.generated = std::move(generated.front());
    }
    out.selection = SelectCaption(pool);
    if (record.gold_caption) {
      out.metrics = EvaluatePair(Tokenize(out.selection->winner.text),
                                 Tokenize(*record.gold_caption));
    }
  } catch (const Error& e) {
    out.error = e;
  } catch (const std::exception& e) {
    out.error = Error(ErrorCode::kIo, e.what());
  }
  return out;
}

}  // namespace

std::string MentionText(const Record& record) {
  return Join(record.mentions, " ");
}

std::shared_ptr<const LikelihoodModel> MakeFilterModel(
    const PipelineConfig& config, std::span<const Record> records) {
  switch (config.filter_mode) {
    case FilterMode::kOff:
      return nullptr;
    case FilterMode::kExternal:
      return std::make_shared<RemoteLikelihoodModel>(*config.scorer_endpoint,
                                                     config.client);
    case FilterMode::kOracle:
      break;
  }
  std::vector<TokenSeq> corpus;
  if (config.scorer_corpus) {
    std::ifstream in(*config.scorer_corpus);
    if (!in) {
      throw Error(ErrorCode::kConfig,
                  "cannot open scorer corpus " + config.scorer_corpus->string());
    }
    for (std::string line; std::getline(in, line);) {
      corpus.push_back(Tokenize(line));
    }
  } else {
    for (const Record& r : records) {
      corpus.push_back(Tokenize(r.ocr_text));
      for (const auto& m : r.mentions) corpus.push_back(Tokenize(m));
      for (const auto& p : r.paragraphs) corpus.push_back(Tokenize(p));
      if (r.gold_caption) corpus.push_back(Tokenize(*r.gold_caption));
    }
  }
  return std::make_shared<CacheScorer>(
      CacheScorer::Fit(corpus, config.alpha, config.beta, config.k));
}

PipelineInputs PrepareInputs(
    const PipelineConfig& config, std::span<const Record> records,
    std::span<const std::filesystem::path> candidate_files, Stage last_stage) {
  ValidateConfig(config);
  PipelineInputs inputs;
  inputs.filter_model = MakeFilterModel(config, records);
  if (last_stage == Stage::kSelect) {
    if (!candidate_files.empty()) {
      inputs.pools = LoadCandidatePools(candidate_files);
    } else if (!config.scorer_endpoint) {
      throw Error(ErrorCode::kConfig,
                  "selection needs candidate files or a generation endpoint");
    }
  }
  return inputs;
}

PipelineResult RunPipeline(const PipelineConfig& config,
                           std::span<const Record> records,
                           const PipelineInputs& inputs, Stage last_stage) {
  ValidateConfig(config);
  const RunContext ctx{config, inputs, last_stage,
                       PromptTemplate::For(config.template_id)};
  PipelineResult result;
  result.outcomes.resize(records.size());

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      result.outcomes[i] = ProcessRecord(ctx, records[i]);
    }
  };
  const std::size_t threads = std::min<std::size_t>(
      static_cast<std::size_t>(config.parallelism), records.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<MetricReport> reports;
  for (const RecordOutcome& outcome : result.outcomes) {
    if (outcome.ok()) {
      ++result.succeeded;
      if (outcome.metrics) reports.push_back(*outcome.metrics);
    } else {
      ++result.failed;
    }
  }
  if (!reports.empty()) result.corpus = MeanReport(reports);
  return result;
}

PipelineResult RunPipeline(
    const PipelineConfig& config, std::span<const Record> records,
    std::span<const std::filesystem::path> candidate_files) {
  const PipelineInputs inputs = PrepareInputs(config, records, candidate_files);
  return RunPipeline(config, records, inputs);
}

nlohmann::ordered_json FilteredToJson(std::string_view record_id,
                                      const FilteredParagraph& paragraph) {
  nlohmann::ordered_json j;
  j["record_id"] = record_id;
  j["text"] = paragraph.text;
  j["kept_indices"] = paragraph.kept_indices;
  j["lambda"] = paragraph.lambda_used;
  j["all_filtered"] = paragraph.all_filtered;
  return j;
}

void WriteStageOutputs(const PipelineResult& result,
                       const PipelineConfig& config,
                       const std::filesystem::path& dir) {
  std::vector<nlohmann::ordered_json> chunks, filtered, prompts, candidates,
      selected, metrics, errors;
  for (const RecordOutcome& o : result.outcomes) {
    if (!o.ok()) {
      nlohmann::ordered_json e;
      e["record_id"] = o.record_id;
      e["error"] = ErrorCodeName(o.error->code());
      e["message"] = o.error->what();
      errors.push_back(std::move(e));
      continue;
    }
    if (o.filter) {
      for (const ScoredChunk& sc : o.filter->scored) {
        chunks.push_back(ScoredChunkToJson(o.record_id, sc, config.lambda));
      }
      filtered.push_back(FilteredToJson(o.record_id, o.filter->paragraph));
    } else {
      FilteredParagraph unfiltered;
      unfiltered.text = o.paragraph;
      unfiltered.lambda_used = 0.0;
      filtered.push_back(FilteredToJson(o.record_id, unfiltered));
    }
    if (o.prompt) prompts.push_back(PromptToJson(o.record_id, *o.prompt));
    for (const Candidate& c : o.generated) {
      candidates.push_back(CandidateToJson(o.record_id, c));
    }
    if (o.selection) {
      selected.push_back(ConsensusToJson(o.record_id, *o.selection));
    }
    if (o.metrics) {
      nlohmann::ordered_json m;
      m["record_id"] = o.record_id;
      const nlohmann::ordered_json flat = ToJson(*o.metrics);
      for (const auto& [key, value] : flat.items()) {
        m[key] = value;
      }
      metrics.push_back(std::move(m));
    }
  }
  WriteJsonLines(dir / "chunks.jsonl", chunks);
  WriteJsonLines(dir / "filtered.jsonl", filtered);
  WriteJsonLines(dir / "prompts.jsonl", prompts);
  if (!candidates.empty()) {
    WriteJsonLines(dir / "candidates.jsonl", candidates);
  }
  WriteJsonLines(dir / "selected.jsonl", selected);
  WriteJsonLines(dir / "metrics.jsonl", metrics);
  WriteJsonLines(dir / "errors.jsonl", errors);

  nlohmann::ordered_json report;
  report["records"] = result.outcomes.size();
  report["succeeded"] = result.succeeded;
  report["failed"] = result.failed;
  report["filter_mode"] = FilterModeName(config.filter_mode);
  report["lambda"] = config.lambda;
  report["template"] = TemplateName(config.template_id);
  report["evaluated"] = metrics.size();
  report["corpus"] = result.corpus ? ToJson(*result.corpus)
                                   : nlohmann::ordered_json(nullptr);
  WriteJsonFile(dir / "report.json", report);
}

double KeptFraction(const PipelineResult& result) {
  double sum = 0.0;
  std::size_t counted = 0;
  for (const RecordOutcome& o : result.outcomes) {
    if (!o.filter || o.filter->scored.empty()) continue;
    sum += static_cast<double>(o.filter->paragraph.kept_indices.size()) /
           static_cast<double>(o.filter->scored.size());
    ++counted;
  }
  return counted == 0 ? 1.0 : sum / static_cast<double>(counted);
}

std::vector<SweepRow> SweepLambda(
    const PipelineConfig& config, std::span<const Record> records,
    std::span<const std::filesystem::path> candidate_files,
    std::span<const double> lambdas) {
  if (config.filter_mode == FilterMode::kOff) {
    throw Error(ErrorCode::kConfig,
                "sweep needs filter mode oracle or external");
  }
  PipelineConfig run_config = config;
  const PipelineInputs inputs =
      PrepareInputs(run_config, records, candidate_files);
  std::vector<SweepRow> rows;
  for (double lambda : lambdas) {
    run_config.lambda = lambda;
    const PipelineResult result = RunPipeline(run_config, records, inputs);
    rows.push_back({lambda, KeptFraction(result), result.corpus,
                    result.failed});
  }
  return rows;
}

nlohmann::ordered_json SweepRowToJson(const SweepRow& row) {
  nlohmann::ordered_json j;
  j["lambda"] = row.lambda;
  j["kept_fraction"] = row.kept_fraction;
  j["failed"] = row.failed;
  j["corpus"] =
      row.corpus ? ToJson(*row.corpus) : nlohmann::ordered_json(nullptr);
  return j;
}

}  // namespace figcap
