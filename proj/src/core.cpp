#include "kgcodec/core.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace kgcodec {

namespace {

bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

const EntityType* Schema::find_entity_by_id(std::string_view id) const {
    for (const auto& et : entity_types)
        if (et.id == id) return &et;
    return nullptr;
}

const EntityType* Schema::find_entity_by_code(std::string_view code_name) const {
    for (const auto& et : entity_types)
        if (et.code_name == code_name) return &et;
    return nullptr;
}

const RelationType* Schema::find_relation_by_id(std::string_view id) const {
    for (const auto& rt : relation_types)
        if (rt.id == id) return &rt;
    return nullptr;
}

const RelationType* Schema::find_relation_by_surface(std::string_view surface) const {
    for (const auto& rt : relation_types)
        if (rt.surface == surface) return &rt;
    return nullptr;
}

const RelationType* Schema::find_relation_by_code(std::string_view code_name) const {
    for (const auto& rt : relation_types)
        if (rt.code_name && *rt.code_name == code_name) return &rt;
    return nullptr;
}

std::string normalize_surface(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_ascii_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += c;
    }
    return out;
}

std::string fold_case_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

RelationTriple normalized_triple(const RelationTriple& t) {
    RelationTriple out = t;
    out.head.text = normalize_surface(t.head.text);
    out.relation = normalize_surface(t.relation);
    out.tail.text = normalize_surface(t.tail.text);
    return out;
}

bool is_valid_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto head = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
    auto rest = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
    if (!head(s.front())) return false;
    for (char c : s.substr(1))
        if (!rest(c)) return false;
    return true;
}

bool is_reserved_identifier(std::string_view s) {
    return s == "Entity" || s == "Relation" || s == "Triple" || s == "Rel" || s == "Extract";
}

std::string ValidationReport::to_string() const {
    if (ok) return "ok";
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) os << "; ";
        os << violations[i];
    }
    return os.str();
}

ValidationReport validate_schema(const Schema& schema) {
    ValidationReport report;
    auto violate = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

    if (schema.entity_types.empty()) violate("schema has no entity types");
    if (schema.relation_types.empty()) violate("schema has no relation types");

    std::set<std::string> seen_codes;
    auto check_code = [&](const std::string& owner, const std::string& code) {
        if (!is_valid_identifier(code))
            violate(owner + ": code_name '" + code + "' is not a valid identifier");
        else if (is_reserved_identifier(code))
            violate(owner + ": code_name '" + code + "' is a reserved identifier");
        if (!seen_codes.insert(code).second)
            violate(owner + ": duplicate code_name '" + code + "'");
    };

    std::set<std::string> entity_ids;
    for (const auto& et : schema.entity_types) {
        const std::string owner = "entity type '" + et.id + "'";
        if (et.id.empty()) violate("entity type with empty id");
        if (et.id == kUnknownEntityType) violate(owner + ": id collides with the UNKNOWN sentinel");
        if (!entity_ids.insert(et.id).second) violate("duplicate entity type id '" + et.id + "'");
        check_code(owner, et.code_name);
    }

    std::set<std::string> relation_ids;
    for (const auto& rt : schema.relation_types) {
        const std::string owner = "relation type '" + rt.id + "'";
        if (rt.id.empty()) violate("relation type with empty id");
        if (!relation_ids.insert(rt.id).second) violate("duplicate relation type id '" + rt.id + "'");
        if (normalize_surface(rt.surface).empty()) violate(owner + ": surface is empty");
        if (rt.code_name) check_code(owner, *rt.code_name);
        if (rt.domain && !schema.find_entity_by_id(*rt.domain))
            violate(owner + ": domain '" + *rt.domain + "' does not name an entity type");
        if (rt.range && !schema.find_entity_by_id(*rt.range))
            violate(owner + ": range '" + *rt.range + "' does not name an entity type");
    }

    report.ok = report.violations.empty();
    return report;
}

OverlapReport detect_overlap(const Document& doc) {
    OverlapReport report;
    const std::size_t n = doc.gold.size();

    std::vector<std::pair<std::string, std::string>> texts;  // (head, tail), normalized
    texts.reserve(n);
    for (const auto& t : doc.gold)
        texts.emplace_back(normalize_surface(t.head.text), normalize_surface(t.tail.text));

    std::set<std::pair<std::pair<std::size_t, std::size_t>, std::string>> shared_seen;
    std::set<std::pair<std::pair<std::size_t, std::size_t>, std::pair<std::string, std::string>>> nested_seen;

    auto is_strict_substring = [](const std::string& inner, const std::string& outer) {
        return !inner.empty() && inner.size() < outer.size() &&
               outer.find(inner) != std::string::npos;
    };

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::string* a[2] = {&texts[i].first, &texts[i].second};
            const std::string* b[2] = {&texts[j].first, &texts[j].second};
            for (const std::string* ta : a) {
                for (const std::string* tb : b) {
                    if (*ta == *tb && !ta->empty()) {
                        if (shared_seen.insert({{i, j}, *ta}).second)
                            report.shared_entity_pairs.push_back({i, j, *ta});
                    } else if (is_strict_substring(*ta, *tb)) {
                        if (nested_seen.insert({{i, j}, {*ta, *tb}}).second)
                            report.nested_span_pairs.push_back({i, j, *ta, *tb});
                    } else if (is_strict_substring(*tb, *ta)) {
                        if (nested_seen.insert({{i, j}, {*tb, *ta}}).second)
                            report.nested_span_pairs.push_back({i, j, *tb, *ta});
                    }
                }
            }
        }
    }

    report.is_hard = !report.shared_entity_pairs.empty() || !report.nested_span_pairs.empty();
    return report;
}

Schema parse_schema_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("schema is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("schema must be a JSON object");

    Schema schema;
    try {
        schema.name = j.at("name").get<std::string>();
        for (const auto& e : j.at("entity_types")) {
            EntityType et;
            et.id = e.at("id").get<std::string>();
            et.code_name = e.at("code_name").get<std::string>();
            if (e.contains("description") && !e["description"].is_null())
                et.description = e["description"].get<std::string>();
            schema.entity_types.push_back(std::move(et));
        }
        for (const auto& r : j.at("relation_types")) {
            RelationType rt;
            rt.id = r.at("id").get<std::string>();
            rt.surface = normalize_surface(r.at("surface").get<std::string>());
            if (r.contains("code_name") && !r["code_name"].is_null())
                rt.code_name = r["code_name"].get<std::string>();
            if (r.contains("domain") && !r["domain"].is_null())
                rt.domain = r["domain"].get<std::string>();
            if (r.contains("range") && !r["range"].is_null())
                rt.range = r["range"].get<std::string>();
            schema.relation_types.push_back(std::move(rt));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed schema JSON: ") + e.what());
    }
    return schema;
}

Schema load_schema_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open schema file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_schema_json(buf.str());
}

std::string schema_to_json_string(const Schema& schema, bool pretty) {
    nlohmann::json j;
    j["name"] = schema.name;
    j["entity_types"] = nlohmann::json::array();
    for (const auto& et : schema.entity_types) {
        nlohmann::json e{{"id", et.id}, {"code_name", et.code_name}};
        if (et.description) e["description"] = *et.description;
        j["entity_types"].push_back(std::move(e));
    }
    j["relation_types"] = nlohmann::json::array();
    for (const auto& rt : schema.relation_types) {
        nlohmann::json r{{"id", rt.id}, {"surface", rt.surface}};
        if (rt.code_name) r["code_name"] = *rt.code_name;
        if (rt.domain) r["domain"] = *rt.domain;
        if (rt.range) r["range"] = *rt.range;
        j["relation_types"].push_back(std::move(r));
    }
    return pretty ? j.dump(2) : j.dump();
}

}  // namespace kgcodec
