#include "kgcodec/corpus.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <unordered_set>

#include "json.hpp"

#include "kgcodec/promptgen.hpp"

namespace kgcodec {

std::string camelize_type(std::string_view etype) {
    std::string out;
    bool at_part_start = true;
    for (char c : etype) {
        const bool alnum = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                           (c >= '0' && c <= '9');
        if (!alnum) {
            at_part_start = true;
            continue;
        }
        if (at_part_start && c >= 'a' && c <= 'z')
            out += static_cast<char>(c - 'a' + 'A');
        else if (!at_part_start && c >= 'A' && c <= 'Z')
            out += static_cast<char>(c - 'A' + 'a');
        else
            out += c;
        at_part_start = false;
    }
    return out;
}

std::string entity_code_for_type(std::string_view etype,
                                 const RestructureOptions& opts) {
    if (etype == kUnknownEntityType) return opts.fallback_entity_code;
    const std::string code = camelize_type(etype);
    if (!is_valid_identifier(code) || is_reserved_identifier(code))
        return opts.fallback_entity_code;
    return code;
}

std::string restructure_record(const Document& doc, const RestructureOptions& opts) {
    std::string out = "class Extract:\n    \"\"\" " + doc.text + " \"\"\"\n\n";
    out += kCompletionPoint;
    for (const auto& t : doc.gold) {
        out += "    Triple(" + entity_code_for_type(t.head.etype, opts) + "(\"" +
               escape_string_literal(normalize_surface(t.head.text)) + "\"), Rel(\"" +
               escape_string_literal(normalize_surface(t.relation)) + "\"), " +
               entity_code_for_type(t.tail.etype, opts) + "(\"" +
               escape_string_literal(normalize_surface(t.tail.text)) + "\")),\n";
    }
    out += "])\n";
    return out;
}

namespace {

bool parse_corpus_line(const std::string& line, Document& doc) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return false;
    try {
        doc.id = j.at("id").get<std::string>();
        doc.text = j.at("text").get<std::string>();
        doc.gold.clear();
        for (const auto& t : j.at("triples")) {
            RelationTriple triple;
            triple.head.text = t.at("head").at("text").get<std::string>();
            triple.head.etype = t.at("head").at("type").get<std::string>();
            triple.tail.text = t.at("tail").at("text").get<std::string>();
            triple.tail.etype = t.at("tail").at("type").get<std::string>();
            triple.relation = normalize_surface(t.at("relation").get<std::string>());
            if (normalize_surface(triple.head.text).empty() ||
                normalize_surface(triple.tail.text).empty() || triple.relation.empty() ||
                triple.head.etype.empty() || triple.tail.etype.empty())
                return false;
            doc.gold.push_back(std::move(triple));
        }
    } catch (const nlohmann::json::exception&) {
        return false;
    }
    return !doc.id.empty() && !doc.text.empty();
}

std::string shard_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "shard-%05zu.txt", index);
    return buf;
}

}  // namespace

RestructureStats restructure_stream(std::istream& in, const std::string& out_dir,
                                    const RestructureOptions& opts) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir);

    RestructureStats stats;
    std::unordered_set<std::string> relations;

    const std::size_t per_shard = opts.records_per_shard ? opts.records_per_shard : 1;
    std::ofstream shard;
    std::size_t shard_index = 0;
    std::size_t in_shard = 0;

    std::string line;
    Document doc;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos ||
            !parse_corpus_line(line, doc)) {
            ++stats.skipped;
            continue;
        }

        if (in_shard == per_shard) {
            shard.close();
            in_shard = 0;
            ++shard_index;
        }
        if (in_shard == 0) {
            const fs::path path = fs::path(out_dir) / shard_name(shard_index);
            shard.open(path, std::ios::binary | std::ios::trunc);
            if (!shard) throw IoError("cannot write shard file: " + path.string());
        } else {
            shard << '\n';
        }
        shard << restructure_record(doc, opts);
        if (!shard) throw IoError("write failed in output directory " + out_dir);

        ++stats.sentences;
        ++in_shard;
        stats.triples += doc.gold.size();
        for (const auto& t : doc.gold) relations.insert(t.relation);
    }
    if (shard.is_open()) shard.close();

    stats.distinct_relations = relations.size();
    const fs::path stats_path = fs::path(out_dir) / "stats.json";
    std::ofstream stats_out(stats_path, std::ios::binary | std::ios::trunc);
    if (!stats_out) throw IoError("cannot write " + stats_path.string());
    stats_out << restructure_stats_to_json(stats, true) << '\n';
    return stats;
}

RestructureStats restructure_file(const std::string& in_path,
                                  const std::string& out_dir,
                                  const RestructureOptions& opts) {
    std::ifstream in(in_path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus file: " + in_path);
    return restructure_stream(in, out_dir, opts);
}

std::string restructure_stats_to_json(const RestructureStats& stats, bool pretty) {
    nlohmann::json j{{"sentences", stats.sentences},
                     {"triples", stats.triples},
                     {"distinct_relations", stats.distinct_relations},
                     {"skipped", stats.skipped}};
    return pretty ? j.dump(2) : j.dump();
}

}  // namespace kgcodec
