#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kgcodec/codeparse.hpp"
#include "kgcodec/corpus.hpp"
#include "kgcodec/datasets.hpp"
#include "kgcodec/evalkit.hpp"
#include "kgcodec/llm_client.hpp"
#include "kgcodec/promptgen.hpp"
#include "kgcodec/runner.hpp"

namespace py = pybind11;
using namespace kgcodec;

namespace {

PromptOptions make_options(const std::string& style, bool type_hints, bool rationale) {
    PromptOptions opts;
    opts.relation_style = relation_style_from_string(style);
    opts.include_type_hints = type_hints;
    opts.include_rationale = rationale;
    return opts;
}

}  // namespace

PYBIND11_MODULE(_kgcodec, m) {
    m.doc() = "schema-aware triple extraction with code-shaped prompts";

    py::register_exception<ValidationError>(m, "ValidationError");
    py::register_exception<IoError>(m, "IoError");

    py::class_<EntityMention>(m, "EntityMention")
        .def(py::init<>())
        .def(py::init([](std::string text, std::string etype) {
                 return EntityMention{std::move(text), std::move(etype)};
             }),
             py::arg("text"), py::arg("etype") = std::string(kUnknownEntityType))
        .def_readwrite("text", &EntityMention::text)
        .def_readwrite("etype", &EntityMention::etype)
        .def("__repr__", [](const EntityMention& m_) {
            return "EntityMention(" + m_.text + ", " + m_.etype + ")";
        });

    py::class_<RelationTriple>(m, "RelationTriple")
        .def(py::init<>())
        .def(py::init([](EntityMention head, std::string relation, EntityMention tail) {
                 return RelationTriple{std::move(head), std::move(relation), std::move(tail)};
             }),
             py::arg("head"), py::arg("relation"), py::arg("tail"))
        .def_readwrite("head", &RelationTriple::head)
        .def_readwrite("relation", &RelationTriple::relation)
        .def_readwrite("tail", &RelationTriple::tail)
        .def("__eq__", [](const RelationTriple& a, const RelationTriple& b) { return a == b; })
        .def("__repr__", [](const RelationTriple& t) {
            return "RelationTriple(" + t.head.text + ", " + t.relation + ", " +
                   t.tail.text + ")";
        });

    py::class_<Document>(m, "Document")
        .def(py::init<>())
        .def(py::init([](std::string id, std::string text, std::vector<RelationTriple> gold) {
                 return Document{std::move(id), std::move(text), std::move(gold)};
             }),
             py::arg("id"), py::arg("text"),
             py::arg("gold") = std::vector<RelationTriple>{})
        .def_readwrite("id", &Document::id)
        .def_readwrite("text", &Document::text)
        .def_readwrite("gold", &Document::gold);

    py::class_<Schema>(m, "Schema")
        .def_readonly("name", &Schema::name)
        .def_property_readonly("entity_type_ids",
                               [](const Schema& s) {
                                   std::vector<std::string> ids;
                                   for (const auto& et : s.entity_types) ids.push_back(et.id);
                                   return ids;
                               })
        .def_property_readonly("relation_surfaces", [](const Schema& s) {
            std::vector<std::string> out;
            for (const auto& rt : s.relation_types) out.push_back(rt.surface);
            return out;
        });

    py::class_<Metrics>(m, "Metrics")
        .def_readonly("tp", &Metrics::tp)
        .def_readonly("fp", &Metrics::fp)
        .def_readonly("fn", &Metrics::fn)
        .def_readonly("precision", &Metrics::precision)
        .def_readonly("recall", &Metrics::recall)
        .def_readonly("f1", &Metrics::f1)
        .def("__repr__", [](const Metrics& m_) {
            return "Metrics(tp=" + std::to_string(m_.tp) + ", fp=" + std::to_string(m_.fp) +
                   ", fn=" + std::to_string(m_.fn) + ")";
        });

    m.def("load_schema", &load_schema_file, py::arg("path"));
    m.def("parse_schema", &parse_schema_json, py::arg("json_text"));
    m.def(
        "validate_schema",
        [](const Schema& s) { return validate_schema(s).to_string(); },
        py::arg("schema"));

    m.def(
        "load_dataset",
        [](const std::string& path, const Schema& schema) {
            return load_dataset_file(path, schema).documents;
        },
        py::arg("path"), py::arg("schema"));

    m.def("normalize_surface", [](const std::string& s) { return normalize_surface(s); },
          py::arg("text"));
    m.def("prompt_hash", [](const std::string& s) { return stable_prompt_hash(s); },
          py::arg("prompt"));

    m.def(
        "build_prompt",
        [](const Schema& schema, const std::vector<Document>& exemplars,
           const Document& target, const std::string& style, bool type_hints,
           bool rationale) {
            return build_prompt(schema, exemplars, target,
                                make_options(style, type_hints, rationale))
                .text;
        },
        py::arg("schema"), py::arg("exemplars"), py::arg("target"),
        py::arg("style") = "rel_wrapper", py::arg("type_hints") = true,
        py::arg("rationale") = false);

    m.def(
        "parse_completion",
        [](const std::string& text, const Schema& schema) {
            ParseResult result = parse_completion(text, schema);
            py::dict out;
            out["triples"] = result.triples;
            std::vector<std::string> diags;
            for (const auto& d : result.diagnostics)
                diags.push_back((d.severity == DiagnosticSeverity::Error ? "error: "
                                                                         : "warning: ") +
                                d.message);
            out["diagnostics"] = diags;
            out["consumed_bytes"] = result.consumed_bytes;
            return out;
        },
        py::arg("completion"), py::arg("schema"));

    m.def("dedupe_triples", &dedupe_triples, py::arg("triples"));

    m.def(
        "score",
        [](const std::vector<RelationTriple>& gold,
           const std::vector<RelationTriple>& predicted, bool case_insensitive) {
            MatchOptions opts;
            opts.case_insensitive = case_insensitive;
            return score_document(gold, predicted, opts);
        },
        py::arg("gold"), py::arg("predicted"), py::arg("case_insensitive") = false);

    m.def(
        "is_hard",
        [](const Document& doc) { return detect_overlap(doc).is_hard; },
        py::arg("document"));

    m.def(
        "restructure_record",
        [](const Document& doc) { return restructure_record(doc, {}); },
        py::arg("document"));
}
