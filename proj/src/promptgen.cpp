#include "kgcodec/promptgen.hpp"

#include <set>
#include <utility>

namespace kgcodec {

namespace {

std::string entity_class_name(const Schema& schema, const std::string& etype) {
    if (const EntityType* et = schema.find_entity_by_id(etype)) return et->code_name;
    return "Entity";
}

std::string relation_class_name(const Schema& schema, const std::string& surface,
                                const PromptOptions& opts) {
    if (opts.relation_style == RelationStyle::DerivedClass) {
        const RelationType* rt = schema.find_relation_by_surface(normalize_surface(surface));
        if (rt && rt->code_name) return *rt->code_name;
    }
    return "Rel";
}

std::string join_blocks(const std::vector<std::string>& blocks) {
    std::string out;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i) out += '\n';
        out += blocks[i];
    }
    return out;
}

}  // namespace

std::string escape_string_literal(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

std::string render_preamble(const Schema& schema, const PromptOptions& opts) {
    const bool th = opts.include_type_hints;
    const std::string str_hint = th ? ": str" : "";

    std::vector<std::string> blocks;
    blocks.push_back("class Entity:\n    def __init__(self, name" + str_hint +
                     "):\n        self.name = name\n");
    blocks.push_back("class Relation:\n    def __init__(self, name" + str_hint +
                     "):\n        self.name = name\n");
    blocks.push_back("class Triple:\n    def __init__(self, head" +
                     std::string(th ? ": Entity" : "") + ", relation" +
                     (th ? ": Relation" : "") + ", tail" + (th ? ": Entity" : "") +
                     "):\n        self.head = head\n        self.relation = relation\n"
                     "        self.tail = tail\n");
    for (const auto& et : schema.entity_types)
        blocks.push_back("class " + et.code_name + "(Entity):\n    pass\n");
    if (opts.relation_style == RelationStyle::RelWrapper) {
        blocks.push_back("class Rel(Relation):\n    pass\n");
    } else {
        for (const auto& rt : schema.relation_types) {
            if (!rt.code_name)
                throw ValidationError("relation '" + rt.id +
                                      "' has no code_name; derived-class style needs one");
            blocks.push_back("class " + *rt.code_name + "(Relation):\n    pass\n");
        }
    }
    return join_blocks(blocks);
}

std::string render_triple(const RelationTriple& triple, const Schema& schema,
                          const PromptOptions& opts) {
    return "Triple(" + entity_class_name(schema, triple.head.etype) + "(\"" +
           escape_string_literal(triple.head.text) + "\"), " +
           relation_class_name(schema, triple.relation, opts) + "(\"" +
           escape_string_literal(triple.relation) + "\"), " +
           entity_class_name(schema, triple.tail.etype) + "(\"" +
           escape_string_literal(triple.tail.text) + "\"))";
}

std::string render_rationale(const Document& doc, const Schema& schema) {
    // Relations: schema order first, then unknowns in first-occurrence order.
    std::set<std::string> present;
    std::vector<std::string> relations;
    for (const auto& t : doc.gold) present.insert(normalize_surface(t.relation));
    for (const auto& rt : schema.relation_types) {
        if (present.count(rt.surface)) {
            relations.push_back(rt.surface);
            present.erase(rt.surface);
        }
    }
    for (const auto& t : doc.gold) {
        const std::string r = normalize_surface(t.relation);
        if (present.count(r)) {
            relations.push_back(r);
            present.erase(r);
        }
    }

    std::vector<std::string> entities;
    std::set<std::pair<std::string, std::string>> seen;
    auto add_entity = [&](const EntityMention& m) {
        const std::string text = normalize_surface(m.text);
        if (!seen.insert({m.etype, text}).second) return;
        entities.push_back(entity_class_name(schema, m.etype) + "(\"" +
                           escape_string_literal(text) + "\")");
    };
    for (const auto& t : doc.gold) {
        add_entity(t.head);
        add_entity(t.tail);
    }

    std::string out = "# Relations in the text: ";
    for (std::size_t i = 0; i < relations.size(); ++i) {
        if (i) out += ", ";
        out += relations[i];
    }
    out += ".\n# Entities in the text: ";
    for (std::size_t i = 0; i < entities.size(); ++i) {
        if (i) out += "; ";
        out += entities[i];
    }
    out += ".\n# Construct the triples accordingly.\n";
    return out;
}

namespace {

std::string render_extract_header(const Document& doc) {
    return "class Extract:\n    \"\"\" " + doc.text + " \"\"\"\n\n";
}

}  // namespace

std::string render_exemplar(const Document& doc, const Schema& schema,
                            const PromptOptions& opts) {
    std::string out = render_extract_header(doc);
    if (opts.include_rationale) out += render_rationale(doc, schema);
    out += kCompletionPoint;
    for (const auto& t : doc.gold) out += "    " + render_triple(t, schema, opts) + ",\n";
    out += "])\n";
    return out;
}

std::string render_target(const Document& doc, const Schema& schema,
                          const PromptOptions& opts) {
    (void)schema;
    (void)opts;
    return render_extract_header(doc) + kCompletionPoint;
}

Prompt build_prompt(const Schema& schema, const std::vector<Document>& exemplars,
                    const Document& target, const PromptOptions& opts) {
    std::vector<std::string> parts;
    parts.push_back(render_preamble(schema, opts));
    for (const auto& ex : exemplars) parts.push_back(render_exemplar(ex, schema, opts));
    parts.push_back(render_target(target, schema, opts));

    Prompt prompt;
    prompt.text = join_blocks(parts);
    if (!opts.max_prompt_chars) return prompt;

    while (prompt.text.size() > *opts.max_prompt_chars && parts.size() > 2) {
        parts.erase(parts.end() - 2);  // drop the exemplar closest to the target
        ++prompt.dropped_exemplars;
        prompt.text = join_blocks(parts);
    }
    if (prompt.text.size() > *opts.max_prompt_chars)
        throw ValidationError("prompt exceeds max_prompt_chars (" +
                              std::to_string(prompt.text.size()) + " > " +
                              std::to_string(*opts.max_prompt_chars) +
                              ") with no exemplars left to drop");
    return prompt;
}

ExemplarSet substitute_synonyms(
    const ExemplarSet& exemplars,
    const std::unordered_map<std::string, std::string>& synonym_map,
    const Schema& schema) {
    (void)schema;
    ExemplarSet out = exemplars;
    for (auto& doc : out.exemplars) {
        for (auto& t : doc.gold) {
            const std::string key = normalize_surface(t.relation);
            auto it = synonym_map.find(key);
            if (it == synonym_map.end())
                throw ValidationError("no synonym for relation surface '" + key + "'");
            const std::string replacement = normalize_surface(it->second);
            if (replacement.empty())
                throw ValidationError("synonym for '" + key + "' is empty");
            t.relation = replacement;
        }
    }
    return out;
}

}  // namespace kgcodec
