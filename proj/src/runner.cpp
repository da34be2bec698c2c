#include "kgcodec/runner.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "kgcodec/codeparse.hpp"
#include "kgcodec/io_util.hpp"

namespace fs = std::filesystem;

namespace kgcodec {

namespace {

void check_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                const char* context) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                known = true;
                break;
            }
        if (!known)
            throw ValidationError("unknown key '" + it.key() + "' in " + context);
    }
}

std::string resolve_path(const std::string& path, const std::string& base_dir) {
    if (path.empty()) return path;
    fs::path p(path);
    if (p.is_relative()) p = fs::path(base_dir) / p;
    return p.lexically_normal().string();
}

}  // namespace

BackendKind backend_kind_from_string(const std::string& s) {
    if (s == "http") return BackendKind::Http;
    if (s == "fixture") return BackendKind::Fixture;
    if (s == "replay") return BackendKind::Replay;
    throw ValidationError("unknown backend kind '" + s +
                          "' (expected http, fixture, or replay)");
}

std::string backend_kind_to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::Http: return "http";
        case BackendKind::Fixture: return "fixture";
        case BackendKind::Replay: return "replay";
    }
    return "fixture";
}

RelationStyle relation_style_from_string(const std::string& s) {
    if (s == "rel_wrapper") return RelationStyle::RelWrapper;
    if (s == "derived_class") return RelationStyle::DerivedClass;
    throw ValidationError("unknown relation_style '" + s +
                          "' (expected rel_wrapper or derived_class)");
}

std::string relation_style_to_string(RelationStyle style) {
    return style == RelationStyle::RelWrapper ? "rel_wrapper" : "derived_class";
}

RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("run config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("run config must be a JSON object");
    check_keys(j, {"schema", "data", "backend", "gen", "prompt", "run"}, "run config");

    RunConfig cfg;
    try {
        const auto& schema = j.at("schema");
        check_keys(schema, {"path"}, "schema section");
        cfg.schema_path = resolve_path(schema.at("path").get<std::string>(), base_dir);

        const auto& data = j.at("data");
        check_keys(data, {"eval_path", "train_path", "eval_sample", "sample_seed"},
                   "data section");
        cfg.data.eval_path = resolve_path(data.at("eval_path").get<std::string>(), base_dir);
        cfg.data.train_path =
            resolve_path(data.at("train_path").get<std::string>(), base_dir);
        if (data.contains("eval_sample") && !data["eval_sample"].is_null())
            cfg.data.eval_sample = data["eval_sample"].get<std::size_t>();
        cfg.data.sample_seed = data.value("sample_seed", std::uint64_t{7});

        const auto& backend = j.at("backend");
        check_keys(backend,
                   {"kind", "base_url", "model", "api_key_env", "max_retries",
                    "backoff_base_ms", "timeout_ms", "fixture_path", "cache_path"},
                   "backend section");
        cfg.backend.kind = backend_kind_from_string(backend.at("kind").get<std::string>());
        cfg.backend.base_url = backend.value("base_url", "");
        cfg.backend.model = backend.value("model", "");
        cfg.backend.api_key_env = backend.value("api_key_env", "KGCODEC_API_KEY");
        cfg.backend.max_retries = backend.value("max_retries", std::size_t{3});
        cfg.backend.backoff_base_ms = backend.value("backoff_base_ms", std::size_t{250});
        cfg.backend.timeout_ms = backend.value("timeout_ms", std::size_t{60000});
        cfg.backend.fixture_path = resolve_path(backend.value("fixture_path", ""), base_dir);
        cfg.backend.cache_path = resolve_path(backend.value("cache_path", ""), base_dir);

        const auto& prompt = j.value("prompt", nlohmann::json::object());
        check_keys(prompt,
                   {"relation_style", "include_type_hints", "include_rationale",
                    "max_prompt_chars", "exemplars_per_relation", "exemplar_seed",
                    "synonyms_path"},
                   "prompt section");
        cfg.prompt.options.relation_style =
            relation_style_from_string(prompt.value("relation_style", "rel_wrapper"));
        cfg.prompt.options.include_type_hints = prompt.value("include_type_hints", true);
        cfg.prompt.options.include_rationale = prompt.value("include_rationale", false);
        if (prompt.contains("max_prompt_chars") && !prompt["max_prompt_chars"].is_null())
            cfg.prompt.options.max_prompt_chars =
                prompt["max_prompt_chars"].get<std::size_t>();
        cfg.prompt.exemplars_per_relation =
            prompt.value("exemplars_per_relation", std::size_t{1});
        cfg.prompt.exemplar_seed = prompt.value("exemplar_seed", std::uint64_t{7});
        cfg.prompt.synonyms_path = resolve_path(prompt.value("synonyms_path", ""), base_dir);

        const auto& gen = j.value("gen", nlohmann::json::object());
        check_keys(gen, {"temperature", "max_tokens", "stop", "seed"}, "gen section");
        cfg.gen.temperature = gen.value("temperature", 0.5);
        cfg.gen.max_tokens = gen.value("max_tokens", std::size_t{512});
        if (gen.contains("stop"))
            cfg.gen.stop = gen["stop"].get<std::vector<std::string>>();
        else
            cfg.gen.stop = default_stop_sequences(cfg.prompt.options.include_rationale);
        if (gen.contains("seed") && !gen["seed"].is_null())
            cfg.gen.seed = gen["seed"].get<std::uint64_t>();

        const auto& run = j.at("run");
        check_keys(run,
                   {"repeats", "out_dir", "max_concurrency", "hard_subset",
                    "case_insensitive"},
                   "run section");
        cfg.run.repeats = run.value("repeats", std::size_t{3});
        cfg.run.out_dir = resolve_path(run.at("out_dir").get<std::string>(), base_dir);
        cfg.run.max_concurrency = run.value("max_concurrency", std::size_t{4});
        cfg.run.hard_subset = run.value("hard_subset", true);
        cfg.run.case_insensitive = run.value("case_insensitive", false);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed run config: ") + e.what());
    }

    if (cfg.run.repeats == 0) throw ValidationError("run.repeats must be positive");
    if (cfg.run.out_dir.empty()) throw ValidationError("run.out_dir must be set");
    cfg.gen.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    const std::string text = read_text_file(path);
    const fs::path dir = fs::absolute(fs::path(path)).parent_path();
    return parse_run_config(text, dir.string());
}

std::string run_config_to_json(const RunConfig& cfg, bool pretty) {
    nlohmann::json j;
    j["schema"]["path"] = cfg.schema_path;
    j["data"] = {{"eval_path", cfg.data.eval_path},
                 {"train_path", cfg.data.train_path},
                 {"eval_sample",
                  cfg.data.eval_sample ? nlohmann::json(*cfg.data.eval_sample)
                                       : nlohmann::json(nullptr)},
                 {"sample_seed", cfg.data.sample_seed}};
    j["backend"] = {{"kind", backend_kind_to_string(cfg.backend.kind)},
                    {"base_url", cfg.backend.base_url},
                    {"model", cfg.backend.model},
                    {"api_key_env", cfg.backend.api_key_env},
                    {"max_retries", cfg.backend.max_retries},
                    {"backoff_base_ms", cfg.backend.backoff_base_ms},
                    {"timeout_ms", cfg.backend.timeout_ms},
                    {"fixture_path", cfg.backend.fixture_path},
                    {"cache_path", cfg.backend.cache_path}};
    j["gen"] = {{"temperature", cfg.gen.temperature},
                {"max_tokens", cfg.gen.max_tokens},
                {"stop", cfg.gen.stop},
                {"seed", cfg.gen.seed ? nlohmann::json(*cfg.gen.seed)
                                      : nlohmann::json(nullptr)}};
    j["prompt"] = {{"relation_style", relation_style_to_string(cfg.prompt.options.relation_style)},
                   {"include_type_hints", cfg.prompt.options.include_type_hints},
                   {"include_rationale", cfg.prompt.options.include_rationale},
                   {"max_prompt_chars",
                    cfg.prompt.options.max_prompt_chars
                        ? nlohmann::json(*cfg.prompt.options.max_prompt_chars)
                        : nlohmann::json(nullptr)},
                   {"exemplars_per_relation", cfg.prompt.exemplars_per_relation},
                   {"exemplar_seed", cfg.prompt.exemplar_seed},
                   {"synonyms_path", cfg.prompt.synonyms_path}};
    j["run"] = {{"repeats", cfg.run.repeats},
                {"out_dir", cfg.run.out_dir},
                {"max_concurrency", cfg.run.max_concurrency},
                {"hard_subset", cfg.run.hard_subset},
                {"case_insensitive", cfg.run.case_insensitive}};
    return pretty ? j.dump(2) : j.dump();
}

std::string prediction_to_jsonl_line(const DocPrediction& pred) {
    nlohmann::json j;
    j["id"] = pred.id;
    j["finish_reason"] = pred.finish_reason;
    j["raw"] = pred.raw;
    j["triples"] = nlohmann::json::array();
    for (const auto& t : pred.triples) {
        j["triples"].push_back({
            {"head", {{"text", t.head.text}, {"type", t.head.etype}}},
            {"relation", t.relation},
            {"tail", {{"text", t.tail.text}, {"type", t.tail.etype}}},
        });
    }
    j["diagnostics"] = nlohmann::json::array();
    for (const auto& d : pred.diagnostics) {
        j["diagnostics"].push_back({
            {"severity", d.severity == DiagnosticSeverity::Error ? "error" : "warning"},
            {"offset", d.offset},
            {"message", d.message},
        });
    }
    if (!pred.error.empty()) j["error"] = pred.error;
    return j.dump();
}

std::vector<DocPrediction> load_predictions_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open predictions file: " + path);

    std::vector<DocPrediction> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw ValidationError(path + " line " + std::to_string(lineno) +
                                  " is not valid JSON");
        DocPrediction pred;
        try {
            pred.id = j.at("id").get<std::string>();
            pred.finish_reason = j.at("finish_reason").get<std::string>();
            pred.raw = j.at("raw").get<std::string>();
            for (const auto& t : j.at("triples")) {
                RelationTriple triple;
                triple.head.text = t.at("head").at("text").get<std::string>();
                triple.head.etype = t.at("head").at("type").get<std::string>();
                triple.relation = t.at("relation").get<std::string>();
                triple.tail.text = t.at("tail").at("text").get<std::string>();
                triple.tail.etype = t.at("tail").at("type").get<std::string>();
                pred.triples.push_back(std::move(triple));
            }
            for (const auto& d : j.at("diagnostics")) {
                ParseDiagnostic diag;
                diag.severity = d.at("severity").get<std::string>() == "error"
                                    ? DiagnosticSeverity::Error
                                    : DiagnosticSeverity::Warning;
                diag.offset = d.at("offset").get<std::size_t>();
                diag.message = d.at("message").get<std::string>();
                pred.diagnostics.push_back(std::move(diag));
            }
            pred.error = j.value("error", "");
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path + " line " + std::to_string(lineno) +
                                  " is malformed: " + e.what());
        }
        out.push_back(std::move(pred));
    }
    return out;
}

std::set<std::string> hard_document_ids(const Dataset& dataset) {
    std::set<std::string> ids;
    for (const auto& doc : dataset.documents)
        if (detect_overlap(doc).is_hard) ids.insert(doc.id);
    return ids;
}

RunReport score_predictions(const Dataset& dataset,
                            const std::vector<DocPrediction>& predictions,
                            bool hard_subset, const MatchOptions& opts) {
    std::map<std::string, std::vector<RelationTriple>> by_id;
    std::size_t diagnostics_total = 0;
    std::size_t error_responses = 0;
    for (const auto& pred : predictions) {
        if (!by_id.emplace(pred.id, pred.triples).second)
            throw ValidationError("duplicate prediction for document '" + pred.id + "'");
        diagnostics_total += pred.diagnostics.size();
        if (pred.finish_reason == "error") ++error_responses;
    }
    std::optional<std::set<std::string>> hard_ids;
    if (hard_subset) hard_ids = hard_document_ids(dataset);
    return score_run(dataset, by_id, hard_ids, opts, diagnostics_total, error_responses);
}

namespace {

class RunLog {
public:
    explicit RunLog(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw IoError("cannot write log file: " + path);
    }

    void line(const std::string& message) {
        out_ << '[' << now_iso8601_utc() << "] " << message << '\n';
        out_.flush();
    }

private:
    std::ofstream out_;
};

std::unordered_map<std::string, std::string> load_synonyms(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("synonyms file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw ValidationError("synonyms file must be a JSON object");
    std::unordered_map<std::string, std::string> map;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_string())
            throw ValidationError("synonym for '" + key + "' is not a string");
        map[normalize_surface(key)] = value.get<std::string>();
    }
    return map;
}

}  // namespace

RunOutcome run_pipeline(const RunConfig& config) {
    const Schema schema = load_schema_file(config.schema_path);
    const ValidationReport schema_report = validate_schema(schema);
    if (!schema_report.ok)
        throw ValidationError("schema invalid: " + schema_report.to_string());

    Dataset eval_ds = load_dataset_file(config.data.eval_path, schema);
    const Dataset train_ds = load_dataset_file(config.data.train_path, schema);
    if (config.data.eval_sample) {
        Dataset sampled;
        sampled.documents =
            sample_subset(eval_ds, *config.data.eval_sample, config.data.sample_seed);
        sampled.diagnostics = eval_ds.diagnostics;
        eval_ds = std::move(sampled);
    }

    std::unordered_map<std::string, std::string> synonyms;
    MatchOptions match_opts;
    match_opts.case_insensitive = config.run.case_insensitive;
    if (!config.prompt.synonyms_path.empty()) {
        synonyms = load_synonyms(config.prompt.synonyms_path);
        // Predictions come back in synonym surfaces; fold them to schema ones.
        for (const auto& [surface, synonym] : synonyms)
            match_opts.relation_map[normalize_surface(synonym)] = surface;
    }

    auto backend = make_backend(config.backend);

    std::error_code ec;
    fs::create_directories(config.run.out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + config.run.out_dir);
    const fs::path out_dir(config.run.out_dir);

    RunLog log((out_dir / "run.log").string());
    log.line("pipeline start backend=" + backend->describe() + " docs=" +
             std::to_string(eval_ds.documents.size()) + " repeats=" +
             std::to_string(config.run.repeats));

    RunOutcome outcome;
    std::vector<RunReport> reports;

    for (std::size_t r = 1; r <= config.run.repeats; ++r) {
        ExemplarSet exemplars =
            select_exemplars(train_ds, schema, config.prompt.exemplars_per_relation,
                             config.prompt.exemplar_seed + (r - 1));
        if (!synonyms.empty())
            exemplars = substitute_synonyms(exemplars, synonyms, schema);

        std::vector<CompletionRequest> requests;
        requests.reserve(eval_ds.documents.size());
        std::size_t dropped_exemplars = 0;
        for (const auto& doc : eval_ds.documents) {
            Prompt prompt =
                build_prompt(schema, exemplars.exemplars, doc, config.prompt.options);
            dropped_exemplars += prompt.dropped_exemplars;
            CompletionRequest req;
            req.prompt = std::move(prompt.text);
            req.params = config.gen;
            req.tag = doc.id;
            requests.push_back(std::move(req));
        }

        log.line("run " + std::to_string(r) + " start exemplars=" +
                 std::to_string(exemplars.exemplars.size()) + " prompts=" +
                 std::to_string(requests.size()) +
                 (dropped_exemplars ? " dropped_exemplars=" + std::to_string(dropped_exemplars)
                                    : ""));
        const auto t0 = std::chrono::steady_clock::now();
        const std::vector<CompletionResponse> responses =
            complete_batch(requests, *backend, config.run.max_concurrency);
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();

        std::vector<DocPrediction> predictions;
        predictions.reserve(responses.size());
        std::size_t run_errors = 0;
        for (std::size_t i = 0; i < responses.size(); ++i) {
            const auto& resp = responses[i];
            DocPrediction pred;
            pred.id = eval_ds.documents[i].id;
            pred.finish_reason = resp.finish_reason;
            pred.raw = resp.text;
            if (resp.ok()) {
                const std::string trimmed = apply_stop_sequences(resp.text, config.gen.stop);
                ParseResult parsed = parse_completion(trimmed, schema);
                pred.triples = dedupe_triples(parsed.triples);
                pred.diagnostics = std::move(parsed.diagnostics);
            } else {
                pred.error = resp.error;
                ++run_errors;
            }
            predictions.push_back(std::move(pred));
        }
        outcome.total_responses += responses.size();
        outcome.total_errors += run_errors;
        log.line("run " + std::to_string(r) + " done errors=" + std::to_string(run_errors) +
                 " elapsed_ms=" + std::to_string(elapsed));

        std::string lines;
        for (const auto& pred : predictions) lines += prediction_to_jsonl_line(pred) + "\n";
        const std::string run_tag = "run-" + std::to_string(r);
        write_text_file((out_dir / (run_tag + ".predictions.jsonl")).string(), lines);

        RunReport report =
            score_predictions(eval_ds, predictions, config.run.hard_subset, match_opts);
        write_text_file((out_dir / (run_tag + ".report.json")).string(),
                        run_report_to_json(report, true) + "\n");
        reports.push_back(std::move(report));
    }

    outcome.aggregate = aggregate_runs(reports);
    write_text_file((out_dir / "aggregate.json").string(),
                    aggregate_report_to_json(outcome.aggregate, true) + "\n");
    write_text_file((out_dir / "report.txt").string(),
                    format_report_table(reports, outcome.aggregate));
    write_text_file((out_dir / "config.json").string(),
                    run_config_to_json(config, true) + "\n");
    log.line("pipeline done errors=" + std::to_string(outcome.total_errors) + "/" +
             std::to_string(outcome.total_responses));

    outcome.reports = std::move(reports);
    return outcome;
}

}  // namespace kgcodec
