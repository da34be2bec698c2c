#include "kgcodec/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace kgcodec {

const Document* Dataset::find(std::string_view id) const {
    for (const auto& doc : documents)
        if (doc.id == id) return &doc;
    return nullptr;
}

namespace {

EntityMention parse_mention(const nlohmann::json& j) {
    EntityMention m;
    m.text = j.at("text").get<std::string>();
    m.etype = j.at("type").get<std::string>();
    return m;
}

}  // namespace

Dataset parse_dataset_jsonl(const std::string& jsonl_text, const Schema& schema) {
    Dataset ds;
    std::set<std::string> seen_ids;
    std::istringstream in(jsonl_text);
    std::string line;
    std::size_t lineno = 0;

    auto skip = [&](std::string msg) { ds.diagnostics.push_back({lineno, std::move(msg)}); };

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            skip(std::string("not valid JSON: ") + e.what());
            continue;
        }

        Document doc;
        bool bad = false;
        try {
            doc.id = j.at("id").get<std::string>();
            doc.text = j.at("text").get<std::string>();
            for (const auto& t : j.at("triples")) {
                RelationTriple triple;
                triple.head = parse_mention(t.at("head"));
                triple.tail = parse_mention(t.at("tail"));
                triple.relation = normalize_surface(t.at("relation").get<std::string>());
                if (normalize_surface(triple.head.text).empty() ||
                    normalize_surface(triple.tail.text).empty() ||
                    triple.relation.empty() || triple.head.etype.empty() ||
                    triple.tail.etype.empty()) {
                    skip("triple with empty field in document '" + doc.id + "'");
                    bad = true;
                    break;
                }
                doc.gold.push_back(std::move(triple));
            }
        } catch (const nlohmann::json::exception& e) {
            skip(std::string("missing or mistyped field: ") + e.what());
            continue;
        }
        if (bad) continue;
        if (doc.id.empty()) {
            skip("empty document id");
            continue;
        }
        if (doc.text.empty()) {
            skip("empty text in document '" + doc.id + "'");
            continue;
        }
        if (!seen_ids.insert(doc.id).second) {
            skip("duplicate document id '" + doc.id + "'");
            continue;
        }

        for (const auto& t : doc.gold) {
            if (!schema.find_relation_by_surface(t.relation))
                ds.diagnostics.push_back({lineno, "document '" + doc.id +
                                                      "': relation '" + t.relation +
                                                      "' not in schema"});
            for (const auto* m : {&t.head, &t.tail}) {
                if (m->etype != kUnknownEntityType && !schema.find_entity_by_id(m->etype))
                    ds.diagnostics.push_back({lineno, "document '" + doc.id +
                                                          "': entity type '" + m->etype +
                                                          "' not in schema"});
            }
        }
        ds.documents.push_back(std::move(doc));
    }
    return ds;
}

Dataset load_dataset_file(const std::string& path, const Schema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset_jsonl(buf.str(), schema);
}

std::string document_to_jsonl_line(const Document& doc) {
    nlohmann::json j;
    j["id"] = doc.id;
    j["text"] = doc.text;
    j["triples"] = nlohmann::json::array();
    for (const auto& t : doc.gold) {
        j["triples"].push_back({
            {"head", {{"text", t.head.text}, {"type", t.head.etype}}},
            {"relation", t.relation},
            {"tail", {{"text", t.tail.text}, {"type", t.tail.etype}}},
        });
    }
    return j.dump();
}

void write_dataset_file(const std::string& path, const std::vector<Document>& docs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write dataset file: " + path);
    for (const auto& doc : docs) out << document_to_jsonl_line(doc) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound == 0) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

std::vector<Document> sample_subset(const Dataset& dataset, std::size_t n,
                                    std::uint64_t seed) {
    const std::size_t total = dataset.documents.size();
    if (n > total)
        throw ValidationError("sample size " + std::to_string(n) +
                              " exceeds dataset size " + std::to_string(total));
    std::vector<std::size_t> indices(total);
    for (std::size_t i = 0; i < total; ++i) indices[i] = i;

    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + bounded_rand(rng, total - i);
        std::swap(indices[i], indices[j]);
    }
    indices.resize(n);
    std::sort(indices.begin(), indices.end());

    std::vector<Document> out;
    out.reserve(n);
    for (std::size_t idx : indices) out.push_back(dataset.documents[idx]);
    return out;
}

ExemplarSet select_exemplars(const Dataset& pool, const Schema& schema,
                             std::size_t per_relation, std::uint64_t seed) {
    // Which schema relations each pool document can serve as an exemplar for.
    std::vector<std::vector<std::size_t>> candidates(schema.relation_types.size());
    for (std::size_t d = 0; d < pool.documents.size(); ++d) {
        for (std::size_t r = 0; r < schema.relation_types.size(); ++r) {
            const auto& surface = schema.relation_types[r].surface;
            const bool has = std::any_of(
                pool.documents[d].gold.begin(), pool.documents[d].gold.end(),
                [&](const RelationTriple& t) { return t.relation == surface; });
            if (has) candidates[r].push_back(d);
        }
    }

    std::vector<std::string> uncovered;
    for (std::size_t r = 0; r < schema.relation_types.size(); ++r)
        if (candidates[r].empty()) uncovered.push_back(schema.relation_types[r].id);
    if (!uncovered.empty()) {
        std::string msg = "no exemplar candidates for relation(s): ";
        for (std::size_t i = 0; i < uncovered.size(); ++i) {
            if (i) msg += ", ";
            msg += uncovered[i];
        }
        throw ValidationError(msg);
    }

    ExemplarSet out;
    out.seed = seed;
    std::mt19937_64 rng(seed);
    std::set<std::size_t> chosen;

    for (std::size_t r = 0; r < schema.relation_types.size(); ++r) {
        const auto& surface = schema.relation_types[r].surface;
        std::size_t have = 0;
        for (std::size_t d : chosen) {
            const auto& gold = pool.documents[d].gold;
            if (std::any_of(gold.begin(), gold.end(), [&](const RelationTriple& t) {
                    return t.relation == surface;
                }))
                ++have;
        }
        std::vector<std::size_t> fresh;
        for (std::size_t d : candidates[r])
            if (!chosen.count(d)) fresh.push_back(d);

        const std::size_t need =
            per_relation > have ? std::min(per_relation - have, fresh.size()) : 0;
        for (std::size_t k = 0; k < need; ++k) {
            const std::size_t pick = bounded_rand(rng, fresh.size());
            const std::size_t d = fresh[pick];
            fresh.erase(fresh.begin() + static_cast<std::ptrdiff_t>(pick));
            chosen.insert(d);
            out.exemplars.push_back(pool.documents[d]);
        }
        out.covered_relations.push_back(schema.relation_types[r].id);
    }
    return out;
}

}  // namespace kgcodec
