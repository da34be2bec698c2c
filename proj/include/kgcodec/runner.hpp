#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kgcodec/codeparse.hpp"
#include "kgcodec/core.hpp"
#include "kgcodec/datasets.hpp"
#include "kgcodec/evalkit.hpp"
#include "kgcodec/llm_client.hpp"
#include "kgcodec/promptgen.hpp"

namespace kgcodec {

struct DataConfig {
    std::string eval_path;
    std::string train_path;
    std::optional<std::size_t> eval_sample;
    std::uint64_t sample_seed = 7;
};

struct PromptConfig {
    PromptOptions options;
    std::size_t exemplars_per_relation = 1;
    std::uint64_t exemplar_seed = 7;
    std::string synonyms_path;
};

struct RunSection {
    std::size_t repeats = 3;
    std::string out_dir;
    std::size_t max_concurrency = 4;
    bool hard_subset = true;
    bool case_insensitive = false;
};

struct RunConfig {
    std::string schema_path;
    DataConfig data;
    BackendConfig backend;
    GenerationParams gen;
    PromptConfig prompt;
    RunSection run;
};

BackendKind backend_kind_from_string(const std::string& s);
std::string backend_kind_to_string(BackendKind kind);
RelationStyle relation_style_from_string(const std::string& s);
std::string relation_style_to_string(RelationStyle style);

// Paths inside the config resolve relative to base_dir (the config file's
// directory); command-line overrides stay relative to the caller's cwd.
RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir);
RunConfig load_run_config(const std::string& path);
std::string run_config_to_json(const RunConfig& config, bool pretty = false);

struct DocPrediction {
    std::string id;
    std::string finish_reason;
    std::string raw;  // backend text before stop-sequence truncation
    std::vector<RelationTriple> triples;
    std::vector<ParseDiagnostic> diagnostics;
    std::string error;
};

std::string prediction_to_jsonl_line(const DocPrediction& pred);
std::vector<DocPrediction> load_predictions_file(const std::string& path);

struct RunOutcome {
    std::vector<RunReport> reports;
    AggregateReport aggregate;
    std::size_t total_responses = 0;
    std::size_t total_errors = 0;

    bool all_errored() const {
        return total_responses > 0 && total_errors == total_responses;
    }
};

// Full pipeline: exemplar selection, prompting, completion, parsing, scoring.
// Writes run-{r}.predictions.jsonl, run-{r}.report.json, aggregate.json,
// report.txt, config.json, and run.log into run.out_dir. Everything except
// run.log is byte-deterministic for a fixed config and backend behavior.
RunOutcome run_pipeline(const RunConfig& config);

// Re-scores stored predictions against the dataset; reproduces the
// run-{r}.report.json bytes the pipeline wrote.
RunReport score_predictions(const Dataset& dataset,
                            const std::vector<DocPrediction>& predictions,
                            bool hard_subset, const MatchOptions& opts);

// Ids of documents whose gold triples overlap (shared or nested spans).
std::set<std::string> hard_document_ids(const Dataset& dataset);

}  // namespace kgcodec
