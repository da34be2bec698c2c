#include <filesystem>
#include <iostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "kgcodec/codeparse.hpp"
#include "kgcodec/corpus.hpp"
#include "kgcodec/datasets.hpp"
#include "kgcodec/evalkit.hpp"
#include "kgcodec/io_util.hpp"
#include "kgcodec/llm_client.hpp"
#include "kgcodec/promptgen.hpp"
#include "kgcodec/runner.hpp"

namespace fs = std::filesystem;
using namespace kgcodec;

namespace {

Schema load_valid_schema(const std::string& path) {
    Schema schema = load_schema_file(path);
    const ValidationReport report = validate_schema(schema);
    if (!report.ok) throw ValidationError("schema invalid: " + report.to_string());
    return schema;
}

int cmd_validate(const std::string& schema_path, const std::string& data_path) {
    Schema schema = load_schema_file(schema_path);
    const ValidationReport report = validate_schema(schema);
    if (!report.ok) {
        std::cout << "schema: invalid\n";
        for (const auto& v : report.violations) std::cout << "  " << v << '\n';
        return 1;
    }
    std::cout << "schema: ok (" << schema.entity_types.size() << " entity types, "
              << schema.relation_types.size() << " relation types)\n";
    if (!data_path.empty()) {
        const Dataset ds = load_dataset_file(data_path, schema);
        std::cout << "data: " << ds.documents.size() << " documents, "
                  << ds.diagnostics.size() << " diagnostics\n";
        for (const auto& d : ds.diagnostics)
            std::cout << "  line " << d.line << ": " << d.message << '\n';
    }
    return 0;
}

struct PromptArgs {
    std::string schema_path;
    std::string train_path;
    std::string eval_path;
    std::string doc_id;
    std::string text;
    std::string style = "rel_wrapper";
    bool no_type_hints = false;
    bool rationale = false;
    std::size_t exemplars_per_relation = 1;
    std::uint64_t seed = 7;
    std::string synonyms_path;
    std::size_t max_chars = 0;
    std::string out_path;
};

int cmd_prompt(const PromptArgs& args) {
    const Schema schema = load_valid_schema(args.schema_path);
    const Dataset train = load_dataset_file(args.train_path, schema);

    Document target;
    if (!args.text.empty()) {
        target.id = "target";
        target.text = args.text;
    } else {
        if (args.eval_path.empty() || args.doc_id.empty())
            throw ValidationError("pass either --text or both --eval and --doc-id");
        const Dataset eval_ds = load_dataset_file(args.eval_path, schema);
        const Document* doc = eval_ds.find(args.doc_id);
        if (!doc)
            throw ValidationError("document '" + args.doc_id + "' not found in " +
                                  args.eval_path);
        target = *doc;
    }

    PromptOptions opts;
    opts.relation_style = relation_style_from_string(args.style);
    opts.include_type_hints = !args.no_type_hints;
    opts.include_rationale = args.rationale;
    if (args.max_chars) opts.max_prompt_chars = args.max_chars;

    ExemplarSet exemplars =
        select_exemplars(train, schema, args.exemplars_per_relation, args.seed);
    if (!args.synonyms_path.empty()) {
        nlohmann::json j = nlohmann::json::parse(read_text_file(args.synonyms_path));
        std::unordered_map<std::string, std::string> map;
        for (const auto& [key, value] : j.items())
            map[normalize_surface(key)] = value.get<std::string>();
        exemplars = substitute_synonyms(exemplars, map, schema);
    }

    const Prompt prompt = build_prompt(schema, exemplars.exemplars, target, opts);
    if (prompt.dropped_exemplars)
        std::cerr << "warning: dropped " << prompt.dropped_exemplars
                  << " exemplar(s) to fit --max-chars\n";
    if (args.out_path.empty())
        std::cout << prompt.text;
    else
        write_text_file(args.out_path, prompt.text);
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir_override,
            std::size_t repeats_override) {
    RunConfig config = load_run_config(config_path);
    if (!out_dir_override.empty())
        config.run.out_dir = fs::absolute(out_dir_override).lexically_normal().string();
    if (repeats_override) config.run.repeats = repeats_override;

    const RunOutcome outcome = run_pipeline(config);
    std::cout << "runs: " << outcome.reports.size() << ", responses: "
              << outcome.total_responses << ", errors: " << outcome.total_errors << '\n';
    std::cout << "mean f1: " << outcome.aggregate.overall.f1.mean << '\n';
    std::cout << "outputs in " << config.run.out_dir << '\n';
    if (outcome.all_errored()) {
        std::cerr << "error: every completion request failed\n";
        return 3;
    }
    return 0;
}

int cmd_eval(const std::string& schema_path, const std::string& data_path,
             const std::vector<std::string>& prediction_paths, bool hard,
             bool case_insensitive, bool table) {
    const Schema schema = load_valid_schema(schema_path);
    const Dataset ds = load_dataset_file(data_path, schema);
    MatchOptions opts;
    opts.case_insensitive = case_insensitive;

    std::vector<RunReport> reports;
    for (const auto& path : prediction_paths)
        reports.push_back(score_predictions(ds, load_predictions_file(path), hard, opts));

    if (reports.size() == 1 && !table) {
        std::cout << run_report_to_json(reports.front(), true) << '\n';
        return 0;
    }
    const AggregateReport aggregate = aggregate_runs(reports);
    if (table)
        std::cout << format_report_table(reports, aggregate);
    else
        std::cout << aggregate_report_to_json(aggregate, true) << '\n';
    return 0;
}

int cmd_hardset(const std::string& schema_path, const std::string& data_path,
                const std::string& out_path) {
    const Schema schema = load_valid_schema(schema_path);
    const Dataset ds = load_dataset_file(data_path, schema);
    const std::set<std::string> hard_ids = hard_document_ids(ds);

    std::vector<Document> hard_docs;
    for (const auto& doc : ds.documents)
        if (hard_ids.count(doc.id)) hard_docs.push_back(doc);
    write_dataset_file(out_path, hard_docs);

    std::cout << "hard documents: " << hard_docs.size() << " of "
              << ds.documents.size() << '\n';
    if (hard_docs.empty())
        std::cerr << "warning: no overlapping documents found; wrote an empty set\n";
    return 0;
}

int cmd_restructure(const std::string& in_path, const std::string& out_dir,
                    std::size_t records_per_shard, const std::string& fallback) {
    RestructureOptions opts;
    if (records_per_shard) opts.records_per_shard = records_per_shard;
    if (!fallback.empty()) {
        if (!is_valid_identifier(fallback) || is_reserved_identifier(fallback))
            throw ValidationError("--fallback-entity must be a non-reserved identifier");
        opts.fallback_entity_code = fallback;
    }
    const RestructureStats stats = restructure_file(in_path, out_dir, opts);
    std::cout << restructure_stats_to_json(stats, true) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"schema-aware triple extraction with code-shaped prompts"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "kgcodec 0.1.0");
    int exit_code = 0;

    auto* validate = app.add_subcommand("validate", "check a schema (and optionally a dataset)");
    std::string v_schema, v_data;
    validate->add_option("--schema", v_schema, "schema JSON file")->required();
    validate->add_option("--data", v_data, "dataset JSONL file");
    validate->callback([&] { exit_code = cmd_validate(v_schema, v_data); });

    auto* prompt = app.add_subcommand("prompt", "print the prompt for one document");
    PromptArgs p;
    prompt->add_option("--schema", p.schema_path, "schema JSON file")->required();
    prompt->add_option("--train", p.train_path, "exemplar pool JSONL")->required();
    prompt->add_option("--eval", p.eval_path, "dataset holding the target document");
    prompt->add_option("--doc-id", p.doc_id, "target document id in --eval");
    prompt->add_option("--text", p.text, "ad-hoc target text instead of --eval/--doc-id");
    prompt->add_option("--style", p.style, "rel_wrapper or derived_class");
    prompt->add_flag("--no-type-hints", p.no_type_hints, "drop parameter annotations");
    prompt->add_flag("--rationale", p.rationale, "add rationale comments to exemplars");
    prompt->add_option("--exemplars", p.exemplars_per_relation, "exemplars per relation");
    prompt->add_option("--seed", p.seed, "exemplar selection seed");
    prompt->add_option("--synonyms", p.synonyms_path, "relation synonym map JSON");
    prompt->add_option("--max-chars", p.max_chars, "prompt budget in characters");
    prompt->add_option("--out", p.out_path, "write the prompt here instead of stdout");
    prompt->callback([&] { exit_code = cmd_prompt(p); });

    auto* run = app.add_subcommand("run", "run the full extraction pipeline");
    std::string r_config, r_out_dir;
    std::size_t r_repeats = 0;
    run->add_option("--config", r_config, "run config JSON file")->required();
    run->add_option("--out-dir", r_out_dir, "override run.out_dir (cwd-relative)");
    run->add_option("--repeats", r_repeats, "override run.repeats");
    run->callback([&] { exit_code = cmd_run(r_config, r_out_dir, r_repeats); });

    auto* eval = app.add_subcommand("eval", "re-score stored predictions");
    std::string e_schema, e_data;
    std::vector<std::string> e_preds;
    bool e_hard = true, e_ci = false, e_table = false;
    eval->add_option("--schema", e_schema, "schema JSON file")->required();
    eval->add_option("--data", e_data, "gold dataset JSONL")->required();
    eval->add_option("--predictions", e_preds, "predictions JSONL file(s)")->required();
    eval->add_flag("--hard,!--no-hard", e_hard, "also score the overlapping subset");
    eval->add_flag("--case-insensitive", e_ci, "fold ASCII case before matching");
    eval->add_flag("--table", e_table, "print the text table instead of JSON");
    eval->callback([&] {
        exit_code = cmd_eval(e_schema, e_data, e_preds, e_hard, e_ci, e_table);
    });

    auto* hardset = app.add_subcommand("hardset", "extract documents with overlapping triples");
    std::string h_schema, h_data, h_out;
    hardset->add_option("--schema", h_schema, "schema JSON file")->required();
    hardset->add_option("--data", h_data, "dataset JSONL file")->required();
    hardset->add_option("--out", h_out, "output JSONL path")->required();
    hardset->callback([&] { exit_code = cmd_hardset(h_schema, h_data, h_out); });

    auto* restructure =
        app.add_subcommand("restructure", "rewrite an aligned corpus as code blocks");
    std::string c_in, c_out_dir, c_fallback;
    std::size_t c_per_shard = 0;
    restructure->add_option("--in", c_in, "aligned corpus JSONL")->required();
    restructure->add_option("--out-dir", c_out_dir, "shard output directory")->required();
    restructure->add_option("--records-per-shard", c_per_shard, "blocks per shard file");
    restructure->add_option("--fallback-entity", c_fallback,
                            "class name for unusable entity types");
    restructure->callback(
        [&] { exit_code = cmd_restructure(c_in, c_out_dir, c_per_shard, c_fallback); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
    return exit_code;
}
