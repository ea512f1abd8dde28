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

// Batch command-line front end: filter, prompt, select, eval, run, sweep.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "figcap/ensemble.h"
#include "figcap/error.h"
#include "figcap/jsonl.h"
#include "figcap/metrics.h"
#include "figcap/pipeline.h"
#include "figcap/scorer_client.h"
#include "figcap/textkit.h"

namespace fs = std::filesystem;

namespace figcap {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPartial = 2;
constexpr int kExitUnreachable = 3;

struct Flags {
  std::string input;
  std::string output;
  std::string config;
  std::string lambda;
  std::string template_name;
  std::string filter_mode;
  std::vector<std::string> candidates;
  std::string endpoint;
  std::optional<int> parallelism;
  std::optional<int> seed;
  // Subcommand specific.
  std::string references;
  std::vector<std::string> lambdas;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnreachableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double ParseLambda(const std::string& text) {
  if (text == "inf" || text == "+inf" || text == "infinity") {
    return std::numeric_limits<double>::infinity();
  }
  double value = 0.0;
  const auto [end, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() ||
      !(value >= 0.0)) {
    throw UsageError("invalid lambda '" + text + "'");
  }
  return value;
}

void AddCommonFlags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--input", f.input, "Input JSONL file")->required();
  cmd->add_option("--output", f.output, "Output directory")->required();
  cmd->add_option("--config", f.config, "TOML or JSON config file");
  cmd->add_option("--lambda", f.lambda, "Relevance threshold (number or inf)");
  cmd->add_option("--template", f.template_name, "Prompt template")
      ->check(CLI::IsMember({"plain", "instruction"}));
  cmd->add_option("--filter-mode", f.filter_mode, "Chunk filter mode")
      ->check(CLI::IsMember({"oracle", "external", "off"}));
  cmd->add_option("--candidates", f.candidates, "Candidate JSONL files")
      ->expected(1, -1);
  cmd->add_option("--endpoint", f.endpoint, "Scoring/generation service URL");
  cmd->add_option("--parallelism", f.parallelism, "Worker threads")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Generation seed");
}

PipelineConfig BuildConfig(const Flags& f) {
  PipelineConfig config;
  if (!f.config.empty()) config = LoadConfig(f.config);
  if (!f.lambda.empty()) config.lambda = ParseLambda(f.lambda);
  if (!f.template_name.empty()) {
    config.template_id = *ParseTemplateName(f.template_name);
  }
  if (!f.filter_mode.empty()) {
    config.filter_mode = *ParseFilterMode(f.filter_mode);
  }
  if (!f.endpoint.empty()) config.scorer_endpoint = f.endpoint;
  if (f.parallelism) config.parallelism = *f.parallelism;
  if (f.seed) config.seed = *f.seed;
  ValidateConfig(config);
  return config;
}

std::vector<fs::path> CandidatePaths(const Flags& f) {
  return {f.candidates.begin(), f.candidates.end()};
}

// Fails fast with exit code 3 when a needed service does not answer.
void ProbeIfRemote(const PipelineConfig& config, bool generating) {
  const bool needed = config.filter_mode == FilterMode::kExternal || generating;
  if (!needed || !config.scorer_endpoint) return;
  if (!ProbeService(*config.scorer_endpoint, config.client.timeout)) {
    throw UnreachableError("service unreachable at " +
                           *config.scorer_endpoint);
  }
}

int Summarize(const PipelineResult& result, const fs::path& out) {
  std::cout << "records=" << result.outcomes.size()
            << " succeeded=" << result.succeeded
            << " failed=" << result.failed << " output=" << out.string()
            << '\n';
  for (const RecordOutcome& o : result.outcomes) {
    if (!o.ok()) {
      std::cerr << "record " << o.record_id << ": " << o.error->what() << '\n';
    }
  }
  return result.failed > 0 ? kExitPartial : kExitOk;
}

int RunStage(const Flags& f, Stage stage) {
  const PipelineConfig config = BuildConfig(f);
  const auto records = LoadRecords(f.input, config.field_map);
  const auto files = CandidatePaths(f);
  ProbeIfRemote(config, stage == Stage::kSelect && files.empty());
  const PipelineInputs inputs = PrepareInputs(config, records, files, stage);
  const PipelineResult result = RunPipeline(config, records, inputs, stage);
  WriteStageOutputs(result, config, f.output);
  return Summarize(result, f.output);
}

// Consensus over candidate files alone; --input lists the record order.
int RunSelect(const Flags& f) {
  const PipelineConfig config = BuildConfig(f);
  if (f.candidates.empty()) {
    throw UsageError("select needs --candidates");
  }
  const auto records = LoadRecords(f.input, config.field_map);
  const auto pools = LoadCandidatePools(CandidatePaths(f));
  std::vector<nlohmann::ordered_json> selected, errors;
  for (const Record& r : records) {
    const auto it = pools.find(r.record_id);
    if (it == pools.end()) {
      errors.push_back({{"record_id", r.record_id},
                        {"error", ErrorCodeName(ErrorCode::kMissingRecord)},
                        {"message", "no candidates for record " + r.record_id}});
      continue;
    }
    selected.push_back(ConsensusToJson(r.record_id, SelectCaption(it->second)));
  }
  const fs::path out(f.output);
  WriteJsonLines(out / "selected.jsonl", selected);
  WriteJsonLines(out / "errors.jsonl", errors);
  std::cout << "records=" << records.size() << " succeeded=" << selected.size()
            << " failed=" << errors.size() << " output=" << out.string()
            << '\n';
  return errors.empty() ? kExitOk : kExitPartial;
}

// Scores predictions ({record_id, text}) against gold captions.
int RunEval(const Flags& f) {
  const PipelineConfig config = BuildConfig(f);
  if (f.references.empty()) throw UsageError("eval needs --references");
  const auto references = LoadRecords(f.references, config.field_map);
  std::map<std::string, std::string> predictions;
  ForEachJsonLine(f.input, [&](const nlohmann::json& j, std::size_t line) {
    if (!j.is_object() || !j.contains("record_id") ||
        !j["record_id"].is_string() || !j.contains("text") ||
        !j["text"].is_string()) {
      throw Error(ErrorCode::kParse, f.input + ":" + std::to_string(line) +
                                         ": expected record_id and text");
    }
    predictions[j["record_id"].get<std::string>()] = j["text"].get<std::string>();
  });

  std::vector<nlohmann::ordered_json> rows, errors;
  std::vector<MetricReport> reports;
  for (const Record& r : references) {
    const auto it = predictions.find(r.record_id);
    if (it == predictions.end() || !r.gold_caption) {
      errors.push_back(
          {{"record_id", r.record_id},
           {"error", ErrorCodeName(ErrorCode::kMissingRecord)},
           {"message", it == predictions.end() ? "no prediction"
                                               : "no gold caption"}});
      continue;
    }
    const MetricReport report =
        EvaluatePair(Tokenize(it->second), Tokenize(*r.gold_caption));
    reports.push_back(report);
    nlohmann::ordered_json row;
    row["record_id"] = r.record_id;
    const nlohmann::ordered_json flat = ToJson(report);
    for (const auto& [key, value] : flat.items()) row[key] = value;
    rows.push_back(std::move(row));
  }
  const fs::path out(f.output);
  WriteJsonLines(out / "metrics.jsonl", rows);
  WriteJsonLines(out / "errors.jsonl", errors);
  nlohmann::ordered_json report;
  report["records"] = references.size();
  report["evaluated"] = rows.size();
  report["failed"] = errors.size();
  report["corpus"] = reports.empty() ? nlohmann::ordered_json(nullptr)
                                     : ToJson(MeanReport(reports));
  WriteJsonFile(out / "report.json", report);
  std::cout << "records=" << references.size() << " evaluated=" << rows.size()
            << " failed=" << errors.size() << " output=" << out.string()
            << '\n';
  return errors.empty() ? kExitOk : kExitPartial;
}

int RunSweep(const Flags& f) {
  const PipelineConfig config = BuildConfig(f);
  std::vector<double> lambdas;
  for (const auto& text : f.lambdas) lambdas.push_back(ParseLambda(text));
  if (lambdas.empty()) lambdas = {0.0, 0.5, 1.0, 1.5, 2.0};
  const auto records = LoadRecords(f.input, config.field_map);
  const auto files = CandidatePaths(f);
  ProbeIfRemote(config, files.empty());
  const auto rows = SweepLambda(config, records, files, lambdas);
  std::vector<nlohmann::ordered_json> out;
  std::size_t failed = 0;
  for (const SweepRow& row : rows) {
    out.push_back(SweepRowToJson(row));
    failed += row.failed;
    std::cout << "lambda=" << row.lambda << " kept=" << row.kept_fraction
              << " failed=" << row.failed;
    if (row.corpus) std::cout << " rouge2_norm=" << row.corpus->rouge2_norm;
    std::cout << '\n';
  }
  WriteJsonLines(fs::path(f.output) / "sweep.jsonl", out);
  return failed > 0 ? kExitPartial : kExitOk;
}

int Main(int argc, char** argv) {
  CLI::App app{"Figure caption summarization pipeline"};
  app.require_subcommand(1);
  Flags f;

  auto* filter = app.add_subcommand("filter", "Score and threshold chunks");
  auto* prompt = app.add_subcommand("prompt", "Filter, then build prompts");
  auto* select = app.add_subcommand("select", "Consensus selection over candidates");
  auto* eval = app.add_subcommand("eval", "Score predictions against gold captions");
  auto* run = app.add_subcommand("run", "Full pipeline");
  auto* sweep = app.add_subcommand("sweep", "Run the pipeline over several lambdas");
  for (auto* cmd : {filter, prompt, select, eval, run, sweep}) {
    AddCommonFlags(cmd, f);
  }
  eval->add_option("--references", f.references,
                   "Records JSONL holding gold captions")
      ->required();
  sweep->add_option("--lambdas", f.lambdas, "Thresholds to sweep")
      ->expected(1, -1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*filter) return RunStage(f, Stage::kFilter);
    if (*prompt) return RunStage(f, Stage::kPrompt);
    if (*select) return RunSelect(f);
    if (*eval) return RunEval(f);
    if (*run) return RunStage(f, Stage::kSelect);
    if (*sweep) return RunSweep(f);
  } catch (const UnreachableError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUnreachable;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.code() == ErrorCode::kConnection || e.code() == ErrorCode::kTimeout) {
      return kExitUnreachable;
    }
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace figcap

int main(int argc, char** argv) { return figcap::Main(argc, argv); }
