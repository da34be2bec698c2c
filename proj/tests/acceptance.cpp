// Acceptance checks for the toolkit: one printed line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "json.hpp"

#include "kgcodec/codeparse.hpp"
#include "kgcodec/corpus.hpp"
#include "kgcodec/datasets.hpp"
#include "kgcodec/evalkit.hpp"
#include "kgcodec/io_util.hpp"
#include "kgcodec/llm_client.hpp"
#include "kgcodec/promptgen.hpp"
#include "kgcodec/runner.hpp"

using namespace kgcodec;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s %2d %s%s%s\n", ok ? "PASS" : "FAIL", index, name.c_str(),
                detail.empty() ? "" : ": ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt_seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2fs", s);
    return buf;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() /
                         ("kgcodec-acceptance-" + std::to_string(::getpid())) / name;
    fs::create_directories(dir);
    return dir;
}

std::string data_dir() { return KGCODEC_DATA_DIR; }

Schema sample_schema() {
    Schema s;
    s.name = "sample";
    s.entity_types = {{"person", "Person", std::nullopt},
                      {"organization", "Organization", std::nullopt},
                      {"location", "Location", std::nullopt}};
    s.relation_types.push_back({"work_for", "work for", "WorkFor", std::nullopt, std::nullopt});
    s.relation_types.push_back({"live_in", "live in", "LiveIn", std::nullopt, std::nullopt});
    s.relation_types.push_back({"located_in", "located in", "LocatedIn", std::nullopt,
                                std::nullopt});
    s.relation_types.push_back({"kill", "kill", "Kill", std::nullopt, std::nullopt});
    return s;
}

std::size_t vm_hwm_kb() {
    std::ifstream in("/proc/self/status");
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("VmHWM:", 0) == 0) {
            std::size_t kb = 0;
            if (std::sscanf(line.c_str(), "VmHWM: %zu", &kb) == 1) return kb;
        }
    }
    return 0;
}

// ---- 1: render/parse round trip ------------------------------------------

std::string random_mention(std::mt19937_64& rng) {
    static const std::vector<std::string> units = {
        "a", "b", "Z", "9", " ", "\"", "\\", "-", "é", "Ü", "漢", "🌍", "ss", "O'Neil"};
    while (true) {
        std::string raw;
        const std::size_t len = 1 + rng() % 8;
        for (std::size_t i = 0; i < len; ++i) raw += units[rng() % units.size()];
        const std::string text = normalize_surface(raw);
        if (!text.empty()) return text;
    }
}

void criterion_round_trip() {
    const auto start = std::chrono::steady_clock::now();
    const Schema schema = sample_schema();
    std::mt19937_64 rng(2024);
    std::size_t docs_checked = 0;

    for (int iter = 0; iter < 1000; ++iter) {
        Document doc;
        doc.id = "doc";
        doc.text = "sentence";
        const std::size_t n = 1 + rng() % 5;
        for (std::size_t i = 0; i < n; ++i) {
            RelationTriple t;
            t.head = {random_mention(rng),
                      schema.entity_types[rng() % schema.entity_types.size()].id};
            t.tail = {random_mention(rng),
                      schema.entity_types[rng() % schema.entity_types.size()].id};
            t.relation = schema.relation_types[rng() % schema.relation_types.size()].surface;
            doc.gold.push_back(std::move(t));
        }

        PromptOptions opts;
        opts.relation_style =
            rng() % 2 ? RelationStyle::DerivedClass : RelationStyle::RelWrapper;
        const std::string block = render_exemplar(doc, schema, opts);
        const std::size_t cut = block.find(kCompletionPoint);
        const ParseResult parsed = parse_completion(
            block.substr(cut + std::string(kCompletionPoint).size()), schema);

        if (!parsed.diagnostics.empty())
            throw std::runtime_error("diagnostics on a clean rendering");
        if (parsed.triples.size() != doc.gold.size())
            throw std::runtime_error("triple count changed in the round trip");
        for (std::size_t i = 0; i < doc.gold.size(); ++i) {
            const RelationTriple& a = doc.gold[i];
            const RelationTriple& b = parsed.triples[i];
            if (a.head.text != b.head.text || a.head.etype != b.head.etype ||
                a.relation != b.relation || a.tail.text != b.tail.text ||
                a.tail.etype != b.tail.etype)
                throw std::runtime_error("triple mismatch in the round trip");
        }
        ++docs_checked;
    }

    const double elapsed = seconds_since(start);
    if (elapsed >= 10.0) throw std::runtime_error("too slow: " + fmt_seconds(elapsed));
    report(1, "render/parse round trip", true,
           std::to_string(docs_checked) + " documents, " + fmt_seconds(elapsed));
}

// ---- 2: parser totality under fuzz ----------------------------------------

void criterion_fuzz() {
    const auto start = std::chrono::steady_clock::now();
    const Schema schema = sample_schema();
    const std::string base =
        "    Triple(Person(\"Ann Lee\"), Rel(\"work for\"), Organization(\"Acme\")),\n"
        "    Triple(Person(\"Bo\"), Rel(\"live in\"), Location(\"Oslo\")),\n"
        "    Triple(Location(\"Oslo\"), Rel(\"located in\"), Location(\"Norway\")),\n"
        "])\n";
    std::mt19937_64 rng(4096);
    std::size_t runs = 0;

    for (int iter = 0; iter < 10000; ++iter) {
        std::string input;
        if (iter % 2 == 0) {
            const std::size_t len = rng() % 300;
            for (std::size_t i = 0; i < len; ++i)
                input += static_cast<char>(rng() % 256);
        } else {
            input = base;
            const int edits = 1 + static_cast<int>(rng() % 4);
            for (int e = 0; e < edits && !input.empty(); ++e) {
                const std::size_t at = rng() % input.size();
                switch (rng() % 3) {
                    case 0: input.erase(at, 1); break;
                    case 1: input.insert(at, 1, static_cast<char>(rng() % 256)); break;
                    default: input[at] = static_cast<char>(rng() % 256); break;
                }
            }
        }
        const ParseResult r = parse_completion(input, schema);
        if (r.consumed_bytes > input.size())
            throw std::runtime_error("consumed more bytes than supplied");
        if (r.skipped_segments > 0 && r.error_count() == 0)
            throw std::runtime_error("skipped a segment without a diagnostic");
        ++runs;
    }

    const double elapsed = seconds_since(start);
    if (elapsed >= 30.0) throw std::runtime_error("too slow: " + fmt_seconds(elapsed));
    report(2, "parser totality under fuzz", true,
           std::to_string(runs) + " inputs, " + fmt_seconds(elapsed));
}

// ---- 3: scoring against a brute-force reference ---------------------------

struct FlatTriple {
    std::string head;
    std::string rel;
    std::string tail;
    bool operator==(const FlatTriple& o) const {
        return head == o.head && rel == o.rel && tail == o.tail;
    }
};

Metrics reference_score(const std::vector<RelationTriple>& gold,
                        const std::vector<RelationTriple>& pred,
                        const MatchOptions& opts) {
    auto flatten = [&](const RelationTriple& t) {
        auto fix = [&](std::string s) {
            s = normalize_surface(s);
            if (opts.case_insensitive) s = fold_case_ascii(s);
            return s;
        };
        FlatTriple f{fix(t.head.text), fix(t.relation), fix(t.tail.text)};
        const auto it = opts.relation_map.find(f.rel);
        if (it != opts.relation_map.end()) f.rel = normalize_surface(it->second);
        return f;
    };
    auto unique_of = [&](const std::vector<RelationTriple>& ts) {
        std::vector<FlatTriple> out;
        for (const auto& t : ts) {
            const FlatTriple f = flatten(t);
            if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
        }
        return out;
    };
    const auto g = unique_of(gold);
    const auto p = unique_of(pred);
    Metrics m;
    for (const auto& f : p)
        if (std::find(g.begin(), g.end(), f) != g.end()) ++m.tp; else ++m.fp;
    m.fn = g.size() - m.tp;
    m.precision = p.empty() ? 0.0 : static_cast<double>(m.tp) / p.size();
    m.recall = g.empty() ? 0.0 : static_cast<double>(m.tp) / g.size();
    m.f1 = (m.precision + m.recall) == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

void criterion_scoring_oracle() {
    std::mt19937_64 rng(777);
    const std::vector<std::string> texts{"a", "b", "c", "d", "A", "b  c"};
    const std::vector<std::string> rels{"r", "s", "t", "u"};
    auto random_side = [&](std::size_t n) {
        std::vector<RelationTriple> out;
        for (std::size_t i = 0; i < n; ++i)
            out.push_back({{texts[rng() % texts.size()], "person"},
                           rels[rng() % rels.size()],
                           {texts[rng() % texts.size()], "person"}});
        return out;
    };

    for (int iter = 0; iter < 500; ++iter) {
        MatchOptions opts;
        opts.case_insensitive = (rng() % 2) == 0;
        if (rng() % 3 == 0) opts.relation_map = {{"u", "r"}};
        const auto gold = random_side(rng() % 7);
        const auto pred = random_side(rng() % 7);
        const Metrics got = score_document(gold, pred, opts);
        const Metrics want = reference_score(gold, pred, opts);
        if (got.tp != want.tp || got.fp != want.fp || got.fn != want.fn)
            throw std::runtime_error("counts diverge from the reference");
        if (std::fabs(got.precision - want.precision) > 1e-12 ||
            std::fabs(got.recall - want.recall) > 1e-12 ||
            std::fabs(got.f1 - want.f1) > 1e-12)
            throw std::runtime_error("derived metrics diverge from the hand formula");
    }

    // Pinned spot value: tp=2, fp=1, fn=2 -> F1 = 4/7.
    const std::vector<RelationTriple> gold = {{{"a", "person"}, "r", {"b", "person"}},
                                              {{"c", "person"}, "r", {"d", "person"}},
                                              {{"e", "person"}, "r", {"f", "person"}},
                                              {{"g", "person"}, "r", {"h", "person"}}};
    const std::vector<RelationTriple> pred = {{{"a", "person"}, "r", {"b", "person"}},
                                              {{"c", "person"}, "r", {"d", "person"}},
                                              {{"x", "person"}, "r", {"y", "person"}}};
    const Metrics spot = score_document(gold, pred);
    if (spot.tp != 2 || spot.fp != 1 || spot.fn != 2)
        throw std::runtime_error("spot counts are wrong");
    if (std::fabs(spot.f1 - 4.0 / 7.0) > 1e-12)
        throw std::runtime_error("spot F1 is not 4/7");

    report(3, "scoring matches a brute-force reference", true,
           "500 instances, spot F1 = 4/7");
}

// ---- 4: matching protocol -------------------------------------------------

void criterion_matching_protocol() {
    const std::vector<RelationTriple> gold = {
        {{"Jane", "person"}, "work for", {"Acme", "organization"}}};

    const std::vector<RelationTriple> type_flip = {
        {{"Jane", "organization"}, "work for", {"Acme", "UNKNOWN"}}};
    const Metrics types = score_document(gold, type_flip);
    if (types.tp != 1 || types.fp != 0 || types.fn != 0)
        throw std::runtime_error("entity types leaked into matching");

    const std::vector<RelationTriple> reversed = {
        {{"Acme", "organization"}, "work for", {"Jane", "person"}}};
    const Metrics direction = score_document(gold, reversed);
    if (direction.tp != 0 || direction.fp != 1 || direction.fn != 1)
        throw std::runtime_error("a reversed triple was accepted");

    const std::vector<RelationTriple> repeated = {
        {{"Jane", "person"}, "work for", {"Acme", "organization"}},
        {{"Jane", "person"}, "work for", {"Acme", "organization"}},
        {{"Jane", "person"}, "work for", {"Acme", "organization"}}};
    const Metrics dup = score_document(gold, repeated);
    if (dup.tp != 1 || dup.fp != 0 || dup.precision != 1.0)
        throw std::runtime_error("duplicates inflated the counts");

    report(4, "matching protocol", true,
           "types excluded, direction enforced, duplicates collapsed");
}

// ---- 5: deterministic end-to-end runs -------------------------------------

nlohmann::json config_without_out_dir(const fs::path& path) {
    nlohmann::json j = nlohmann::json::parse(read_text_file(path.string()));
    j["run"].erase("out_dir");
    return j;
}

void expect_same_bytes(const fs::path& a, const fs::path& b) {
    if (read_text_file(a.string()) != read_text_file(b.string()))
        throw std::runtime_error("outputs differ: " + a.filename().string());
}

void criterion_end_to_end() {
    const RunConfig base = load_run_config(data_dir() + "/toy/run_config.json");
    const fs::path out_a = scratch_dir("run-a");
    const fs::path out_b = scratch_dir("run-b");

    RunConfig cfg_a = base;
    cfg_a.run.out_dir = out_a.string();
    auto start = std::chrono::steady_clock::now();
    const RunOutcome first = run_pipeline(cfg_a);
    const double first_elapsed = seconds_since(start);
    if (first_elapsed >= 5.0)
        throw std::runtime_error("run too slow: " + fmt_seconds(first_elapsed));

    RunConfig cfg_b = base;
    cfg_b.run.out_dir = out_b.string();
    start = std::chrono::steady_clock::now();
    const RunOutcome second = run_pipeline(cfg_b);
    if (seconds_since(start) >= 5.0) throw std::runtime_error("second run too slow");

    if (first.total_errors != 0 || first.total_responses != 60)
        throw std::runtime_error("unexpected response accounting");
    if (first.aggregate.overall.f1.mean != 1.0 || first.aggregate.overall.f1.stdev != 0.0)
        throw std::runtime_error("gold-echo aggregate F1 is not exactly 1.000 +- 0");
    if (second.aggregate.overall.f1.mean != 1.0)
        throw std::runtime_error("second run disagrees");

    for (const char* name :
         {"run-1.predictions.jsonl", "run-2.predictions.jsonl", "run-3.predictions.jsonl",
          "run-1.report.json", "run-2.report.json", "run-3.report.json", "aggregate.json",
          "report.txt"})
        expect_same_bytes(out_a / name, out_b / name);
    if (config_without_out_dir(out_a / "config.json") !=
        config_without_out_dir(out_b / "config.json"))
        throw std::runtime_error("config snapshots differ beyond out_dir");

    // Corrupting fixture: drop the last triple of every multi-triple document.
    const Schema schema = load_schema_file(base.schema_path);
    const Dataset toy = load_dataset_file(base.data.eval_path, schema);
    nlohmann::json fixture = nlohmann::json::object();
    std::size_t total_gold = 0;
    std::size_t expected_tp = 0;
    const PromptOptions render_opts;
    for (const auto& doc : toy.documents) {
        std::vector<RelationTriple> kept = dedupe_triples(doc.gold);
        total_gold += kept.size();
        if (kept.size() > 1) kept.pop_back();
        expected_tp += kept.size();
        std::string completion;
        for (const auto& t : kept)
            completion += "    " + render_triple(t, schema, render_opts) + ",\n";
        completion += "])\n";
        fixture[doc.id] = completion;
    }
    if (expected_tp >= total_gold)
        throw std::runtime_error("corrupting fixture failed to drop anything");

    const fs::path fixture_path = scratch_dir("corrupt") / "fixture.json";
    write_text_file(fixture_path.string(), fixture.dump());
    RunConfig cfg_c = base;
    cfg_c.backend.fixture_path = fixture_path.string();
    cfg_c.run.out_dir = (scratch_dir("corrupt") / "out").string();
    start = std::chrono::steady_clock::now();
    const RunOutcome corrupted = run_pipeline(cfg_c);
    if (seconds_since(start) >= 5.0) throw std::runtime_error("corrupt run too slow");

    const double expected_recall =
        static_cast<double>(expected_tp) / static_cast<double>(total_gold);
    for (const auto& rep : corrupted.reports) {
        if (rep.overall.tp != expected_tp || rep.overall.fp != 0 ||
            rep.overall.fn != total_gold - expected_tp)
            throw std::runtime_error("corrupt counts disagree with the recount");
        if (rep.overall.precision != 1.0)
            throw std::runtime_error("corrupt precision is not exactly 1.0");
        if (rep.overall.recall != expected_recall)
            throw std::runtime_error("corrupt recall disagrees with the recount");
        if (rep.overall.recall >= 1.0)
            throw std::runtime_error("corrupt recall failed to drop");
    }

    char detail[128];
    std::snprintf(detail, sizeof(detail),
                  "identical reruns; gold F1 1.000+-0; corrupt P 1.0, R %zu/%zu",
                  expected_tp, total_gold);
    report(5, "deterministic end-to-end runs", true, detail);
}

// ---- 6: exemplar cover over random pools -----------------------------------

void criterion_exemplar_cover() {
    Schema schema;
    schema.name = "cover";
    schema.entity_types = {{"person", "Person", std::nullopt}};
    for (int r = 0; r < 5; ++r) {
        const std::string id = "rel_" + std::to_string(r);
        schema.relation_types.push_back(
            {id, "relation " + std::to_string(r), std::nullopt, std::nullopt, std::nullopt});
    }

    std::mt19937_64 rng(31);
    std::size_t coverable_pools = 0;
    std::size_t uncoverable_pools = 0;

    for (int iter = 0; iter < 200; ++iter) {
        const bool drop_last = (rng() % 10) < 3;  // make some pools uncoverable
        const std::size_t usable = drop_last ? 4 : 5;

        Dataset pool;
        const std::size_t docs = 3 + rng() % 28;
        for (std::size_t d = 0; d < docs; ++d) {
            Document doc;
            doc.id = "p" + std::to_string(iter) + "-" + std::to_string(d);
            doc.text = "t";
            const std::size_t n = 1 + rng() % 3;
            for (std::size_t i = 0; i < n; ++i) {
                const auto& rel = schema.relation_types[rng() % usable];
                doc.gold.push_back({{"a", "person"}, rel.surface, {"b", "person"}});
            }
            pool.documents.push_back(std::move(doc));
        }

        std::set<std::string> present;
        for (const auto& doc : pool.documents)
            for (const auto& t : doc.gold) present.insert(t.relation);
        const bool coverable = present.size() == schema.relation_types.size();
        const std::size_t k = 1 + rng() % 2;

        if (!coverable) {
            ++uncoverable_pools;
            try {
                select_exemplars(pool, schema, k, iter);
                throw std::runtime_error("an uncoverable pool did not error");
            } catch (const ValidationError& e) {
                bool named = false;
                for (const auto& rt : schema.relation_types)
                    if (!present.count(rt.surface) &&
                        std::string(e.what()).find(rt.id) != std::string::npos)
                        named = true;
                if (!named)
                    throw std::runtime_error("the error does not name a missing relation");
            }
            continue;
        }

        ++coverable_pools;
        const ExemplarSet set = select_exemplars(pool, schema, k, iter);
        std::set<std::string> covered;
        for (const auto& doc : set.exemplars)
            for (const auto& t : doc.gold) covered.insert(t.relation);
        for (const auto& rt : schema.relation_types)
            if (!covered.count(rt.surface))
                throw std::runtime_error("relation left uncovered: " + rt.id);

        const ExemplarSet again = select_exemplars(pool, schema, k, iter);
        if (again.exemplars.size() != set.exemplars.size())
            throw std::runtime_error("selection is not deterministic");
        for (std::size_t i = 0; i < set.exemplars.size(); ++i)
            if (set.exemplars[i].id != again.exemplars[i].id)
                throw std::runtime_error("selection order changed between calls");
    }

    report(6, "exemplar cover over random pools", true,
           std::to_string(coverable_pools) + " covered, " +
               std::to_string(uncoverable_pools) + " rejected");
}

// ---- 7: hard-subset semantics ----------------------------------------------

void criterion_hard_subset() {
    Document shared;
    shared.id = "shared";
    shared.text = "t";
    shared.gold = {{{"the drug", "drug"}, "causes", {"nausea", "disease"}},
                   {{"the drug", "drug"}, "causes", {"rash", "disease"}}};
    if (!detect_overlap(shared).is_hard)
        throw std::runtime_error("a shared-entity document is not hard");

    Document nested;
    nested.id = "nested";
    nested.text = "t";
    nested.gold = {{{"heparin", "drug"}, "causes", {"bleeding", "disease"}},
                   {{"x", "drug"}, "worsens", {"heparin-induced thrombocytopenia",
                                               "disease"}}};
    if (!detect_overlap(nested).is_hard)
        throw std::runtime_error("a nested-mention document is not hard");

    Dataset singletons;
    for (int i = 0; i < 10; ++i) {
        Document d;
        d.id = "s" + std::to_string(i);
        d.text = "t";
        d.gold = {{{"h" + std::to_string(i), "drug"}, "causes",
                   {"t" + std::to_string(i), "disease"}}};
        singletons.documents.push_back(std::move(d));
    }
    if (!hard_document_ids(singletons).empty())
        throw std::runtime_error("single-triple documents were marked hard");

    const Schema ade = load_schema_file(data_dir() + "/schemas/ade.json");
    const Dataset ade_toy = load_dataset_file(data_dir() + "/toy/ade_toy.jsonl", ade);
    const std::set<std::string> expected{"a01", "a03"};
    if (hard_document_ids(ade_toy) != expected)
        throw std::runtime_error("the bundled overlap examples classify wrongly");

    report(7, "hard-subset semantics", true,
           "shared + nested are hard; singletons are not");
}

// ---- 8: stop-sequence handling ---------------------------------------------

void criterion_stop_sequences() {
    const auto plain = default_stop_sequences(false);
    const auto rationale = default_stop_sequences(true);

    const std::string docstring = "    Triple(a),\n\"\"\" trailing prose";
    if (apply_stop_sequences(docstring, plain) != "    Triple(a),\n" ||
        apply_stop_sequences(docstring, rationale) != "    Triple(a),\n")
        throw std::runtime_error("docstring stop failed");

    const std::string next_class = "])\nclass Extract:\n    more";
    if (apply_stop_sequences(next_class, plain) != "])" ||
        apply_stop_sequences(next_class, rationale) != "])")
        throw std::runtime_error("class stop failed");

    const std::string comment = "    Triple(a),  # why\n";
    if (apply_stop_sequences(comment, plain) != "    Triple(a),  ")
        throw std::runtime_error("comment stop failed without rationale");
    if (apply_stop_sequences(comment, rationale) != comment)
        throw std::runtime_error("comment stop wrongly applied with rationale");

    std::mt19937_64 rng(55);
    const std::vector<std::string> pieces = {"Triple(", ")", "\n", "\"\"\"", "#",
                                             "class", "\nclass", "x", " "};
    for (int iter = 0; iter < 500; ++iter) {
        std::string text;
        const std::size_t n = rng() % 12;
        for (std::size_t i = 0; i < n; ++i) text += pieces[rng() % pieces.size()];
        const auto& stops = (rng() % 2) ? plain : rationale;
        const std::string once = apply_stop_sequences(text, stops);
        if (apply_stop_sequences(once, stops) != once)
            throw std::runtime_error("truncation is not idempotent");
        if (once.size() > text.size())
            throw std::runtime_error("truncation grew the text");
    }

    report(8, "stop-sequence handling", true, "earliest stop wins; idempotent");
}

// ---- 9: streaming corpus restructure ---------------------------------------

void criterion_restructure() {
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = scratch_dir("corpus");
    const fs::path in_path = dir / "aligned.jsonl";

    const std::vector<std::string> types = {"person", "geo-political entity", "ORG",
                                            "UNKNOWN", "material"};
    std::string filler;
    while (filler.size() < 900) filler += "lorem ipsum dolor sit amet ";

    std::mt19937_64 rng(99);
    std::set<std::string> relations_used;
    std::size_t lines = 0;
    std::size_t valid = 0;
    std::size_t triples = 0;
    {
        std::ofstream out(in_path, std::ios::binary);
        for (int i = 0; i < 10000; ++i) {
            ++lines;
            if (i % 97 == 5) {
                out << "{broken json\n";
                continue;
            }
            if (i % 101 == 7) {
                out << "\n";
                continue;
            }
            nlohmann::json rec;
            rec["id"] = "c" + std::to_string(i);
            rec["text"] = "Sentence " + std::to_string(i) + ". " + filler;
            nlohmann::json ts = nlohmann::json::array();
            const std::size_t n = 1 + rng() % 3;
            for (std::size_t t = 0; t < n; ++t) {
                const std::string rel = "relation " + std::to_string(rng() % 23);
                relations_used.insert(rel);
                ts.push_back({{"head", {{"text", "head " + std::to_string(t)},
                                        {"type", types[rng() % types.size()]}}},
                              {"relation", rel},
                              {"tail", {{"text", "tail " + std::to_string(t)},
                                        {"type", types[rng() % types.size()]}}}});
                ++triples;
            }
            rec["triples"] = ts;
            out << rec.dump() << '\n';
            ++valid;
        }
    }

    const std::size_t hwm_before = vm_hwm_kb();
    RestructureOptions opts;
    opts.records_per_shard = 1000;
    const RestructureStats stats = restructure_file(in_path.string(),
                                                    (dir / "shards").string(), opts);
    const std::size_t hwm_after = vm_hwm_kb();

    if (stats.sentences != valid) throw std::runtime_error("sentence count drifted");
    if (stats.sentences + stats.skipped != lines)
        throw std::runtime_error("conservation violated: emitted + skipped != input");
    if (stats.triples != triples) throw std::runtime_error("triple count drifted");
    if (stats.distinct_relations != relations_used.size())
        throw std::runtime_error("distinct relation count is wrong");
    if (hwm_before != 0 && hwm_after > hwm_before + 12 * 1024)
        throw std::runtime_error("memory grew by more than 12 MiB while streaming");

    Schema synth;
    synth.name = "synth";
    for (const std::string& t : types) {
        if (t == "UNKNOWN") continue;
        synth.entity_types.push_back({t, camelize_type(t), std::nullopt});
    }
    synth.entity_types.push_back({"thing", "Thing", std::nullopt});
    synth.relation_types.push_back({"r", "relation 0", std::nullopt, std::nullopt,
                                    std::nullopt});

    std::size_t reparsed = 0;
    std::size_t shards = 0;
    const std::string opener = kCompletionPoint;
    for (const auto& entry : fs::directory_iterator(dir / "shards")) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("shard-", 0) != 0) continue;
        ++shards;
        const std::string content = read_text_file(entry.path().string());
        std::size_t at = 0;
        while (true) {
            const std::size_t cut = content.find(opener, at);
            if (cut == std::string::npos) break;
            const std::size_t begin = cut + opener.size();
            // Slice to the next block so each parse sees only its own extract.
            std::size_t end = content.find(opener, begin);
            if (end == std::string::npos) end = content.size();
            const ParseResult r = parse_completion(content.substr(begin, end - begin),
                                                   synth);
            if (!r.diagnostics.empty())
                throw std::runtime_error("a re-parsed block produced diagnostics");
            reparsed += r.triples.size();
            at = begin + r.consumed_bytes;
        }
    }
    if (shards != (valid + opts.records_per_shard - 1) / opts.records_per_shard)
        throw std::runtime_error("unexpected shard count");
    if (reparsed != stats.triples)
        throw std::runtime_error("re-parsed triples disagree with the stats");

    const double elapsed = seconds_since(start);
    if (elapsed >= 20.0) throw std::runtime_error("too slow: " + fmt_seconds(elapsed));
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "%zu records -> %zu shards, %zu triples re-parsed, %s",
                  valid, shards, reparsed, fmt_seconds(elapsed).c_str());
    report(9, "streaming corpus restructure", true, detail);
}

// ---- 10: optional live endpoint smoke --------------------------------------

void criterion_live_smoke() {
    const char* base_url = std::getenv("KGCODEC_SMOKE_BASE_URL");
    const char* model = std::getenv("KGCODEC_SMOKE_MODEL");
    if (!base_url || !*base_url || !model || !*model) {
        report(10, "live endpoint smoke", true,
               "skipped (set KGCODEC_SMOKE_BASE_URL and KGCODEC_SMOKE_MODEL to enable)");
        return;
    }

    RunConfig cfg = load_run_config(data_dir() + "/toy/run_config.json");
    cfg.backend = BackendConfig{};
    cfg.backend.kind = BackendKind::Http;
    cfg.backend.base_url = base_url;
    cfg.backend.model = model;
    if (const char* env = std::getenv("KGCODEC_SMOKE_API_KEY_ENV"); env && *env)
        cfg.backend.api_key_env = env;
    cfg.data.eval_sample = 5;
    cfg.run.repeats = 1;
    cfg.run.out_dir = scratch_dir("live").string();

    const RunOutcome outcome = run_pipeline(cfg);
    if (outcome.total_responses != 5)
        throw std::runtime_error("expected 5 responses");
    if (outcome.all_errored()) throw std::runtime_error("every live request failed");

    const RunReport& rep = outcome.reports.at(0);
    const std::size_t predicted = rep.overall.tp + rep.overall.fp;
    if (predicted < 1) throw std::runtime_error("no triple parsed from the live model");

    const nlohmann::json aggregate = nlohmann::json::parse(
        read_text_file((fs::path(cfg.run.out_dir) / "aggregate.json").string()));
    if (aggregate.at("n_runs") != 1)
        throw std::runtime_error("aggregate report is malformed");

    report(10, "live endpoint smoke", true,
           std::to_string(predicted) + " triples parsed from 5 documents");
}

void run_criterion(int index, const std::string& name, void (*fn)()) {
    try {
        fn();
    } catch (const std::exception& e) {
        report(index, name, false, e.what());
    }
}

}  // namespace

int main() {
    run_criterion(1, "render/parse round trip", criterion_round_trip);
    run_criterion(2, "parser totality under fuzz", criterion_fuzz);
    run_criterion(3, "scoring matches a brute-force reference", criterion_scoring_oracle);
    run_criterion(4, "matching protocol", criterion_matching_protocol);
    run_criterion(5, "deterministic end-to-end runs", criterion_end_to_end);
    run_criterion(6, "exemplar cover over random pools", criterion_exemplar_cover);
    run_criterion(7, "hard-subset semantics", criterion_hard_subset);
    run_criterion(8, "stop-sequence handling", criterion_stop_sequences);
    run_criterion(9, "streaming corpus restructure", criterion_restructure);
    run_criterion(10, "live endpoint smoke", criterion_live_smoke);

    if (failures > 0) {
        std::fprintf(stderr, "%d criteria failed\n", failures);
        return 1;
    }
    return 0;
}
