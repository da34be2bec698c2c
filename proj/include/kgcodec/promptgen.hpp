#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgcodec/core.hpp"

namespace kgcodec {

// The suffix every prompt ends with; the model is expected to continue the
// list it opens.
inline constexpr const char* kCompletionPoint = "extract = Extract([\n";

enum class RelationStyle {
    RelWrapper,     // one generic Rel(Relation) class, relation as its argument
    DerivedClass,   // one class per relation, named by its code_name
};

struct PromptOptions {
    RelationStyle relation_style = RelationStyle::RelWrapper;
    bool include_type_hints = true;
    bool include_rationale = false;
    std::optional<std::size_t> max_prompt_chars;
};

struct ExemplarSet {
    std::vector<Document> exemplars;
    std::vector<std::string> covered_relations;  // schema order
    std::uint64_t seed = 0;
};

struct Prompt {
    std::string text;
    std::size_t dropped_exemplars = 0;
};

// Escapes '"' and '\' for embedding in a double-quoted literal.
std::string escape_string_literal(std::string_view s);

std::string render_preamble(const Schema& schema, const PromptOptions& opts);

std::string render_triple(const RelationTriple& triple, const Schema& schema,
                          const PromptOptions& opts);

// An exemplar block: docstring'd Extract class, optional rationale comment,
// and the populated extract list. The target block for `doc` is the same
// minus rationale and triples, ending exactly at kCompletionPoint.
std::string render_exemplar(const Document& doc, const Schema& schema,
                            const PromptOptions& opts);
std::string render_target(const Document& doc, const Schema& schema,
                          const PromptOptions& opts);

std::string render_rationale(const Document& doc, const Schema& schema);

Prompt build_prompt(const Schema& schema, const std::vector<Document>& exemplars,
                    const Document& target, const PromptOptions& opts);

// Replaces each exemplar relation surface via the map; a missing entry is an
// error. Gold relations are rewritten in place.
ExemplarSet substitute_synonyms(
    const ExemplarSet& exemplars,
    const std::unordered_map<std::string, std::string>& synonym_map,
    const Schema& schema);

}  // namespace kgcodec
