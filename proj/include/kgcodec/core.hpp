#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Domain types shared by every module: KG schemas, documents, relational
// triples, surface normalization, and overlap detection.
namespace kgcodec {

// Sentinel entity-type id for mentions whose class could not be resolved.
inline constexpr const char* kUnknownEntityType = "UNKNOWN";

// Fatal file/OS problems. The CLI maps these to exit code 2.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid data or configuration. The CLI maps these to exit code 1.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EntityType {
    std::string id;         // dataset label, e.g. "disease"
    std::string code_name;  // identifier emitted in code, e.g. "Disease"
    std::optional<std::string> description;
};

struct RelationType {
    std::string id;
    std::string surface;  // text emitted inside Rel("...")
    std::optional<std::string> code_name;
    std::optional<std::string> domain;  // entity-type id
    std::optional<std::string> range;   // entity-type id
};

struct Schema {
    std::string name;
    std::vector<EntityType> entity_types;
    std::vector<RelationType> relation_types;

    const EntityType* find_entity_by_id(std::string_view id) const;
    const EntityType* find_entity_by_code(std::string_view code_name) const;
    const RelationType* find_relation_by_id(std::string_view id) const;
    const RelationType* find_relation_by_surface(std::string_view surface) const;
    const RelationType* find_relation_by_code(std::string_view code_name) const;
};

struct EntityMention {
    std::string text;
    std::string etype = kUnknownEntityType;  // entity-type id or UNKNOWN

    bool operator==(const EntityMention&) const = default;
};

struct RelationTriple {
    EntityMention head;
    std::string relation;  // relation surface form
    EntityMention tail;

    bool operator==(const RelationTriple&) const = default;
};

struct Document {
    std::string id;
    std::string text;
    std::vector<RelationTriple> gold;
};

// Trims and collapses internal whitespace runs to single spaces. Case is
// preserved; idempotent.
std::string normalize_surface(std::string_view s);

// ASCII-only lowercase fold, used by the optional case-insensitive mode.
std::string fold_case_ascii(std::string_view s);

// Returns a copy with all surfaces (entity texts and relation) normalized.
RelationTriple normalized_triple(const RelationTriple& t);

// True iff s matches [A-Za-z_][A-Za-z0-9_]*.
bool is_valid_identifier(std::string_view s);

// The class names owned by the code-format mini-language itself.
bool is_reserved_identifier(std::string_view s);

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> violations;

    std::string to_string() const;
};

// Collects every invariant violation; ok iff none. Violations are data,
// never exceptions.
ValidationReport validate_schema(const Schema& schema);

// A pair of distinct gold triples sharing one normalized entity text.
struct SharedEntityPair {
    std::size_t first_triple = 0;
    std::size_t second_triple = 0;
    std::string text;
};

// A pair where an entity text of one triple is a strict substring of an
// entity text of the other.
struct NestedSpanPair {
    std::size_t first_triple = 0;
    std::size_t second_triple = 0;
    std::string inner;
    std::string outer;
};

struct OverlapReport {
    bool is_hard = false;
    std::vector<SharedEntityPair> shared_entity_pairs;
    std::vector<NestedSpanPair> nested_span_pairs;
};

// A document is "hard" when gold triples share an entity text or nest one
// entity text inside another.
OverlapReport detect_overlap(const Document& doc);

// Schema file I/O: one JSON document, keys name / entity_types / relation_types.
Schema parse_schema_json(const std::string& json_text);
Schema load_schema_file(const std::string& path);
std::string schema_to_json_string(const Schema& schema, bool pretty = true);

}  // namespace kgcodec
