#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "kgcodec/core.hpp"
#include "kgcodec/promptgen.hpp"

namespace kgcodec {

struct LineDiagnostic {
    std::size_t line = 0;  // 1-based
    std::string message;
};

struct Dataset {
    std::vector<Document> documents;
    std::vector<LineDiagnostic> diagnostics;

    const Document* find(std::string_view id) const;
};

// One JSON object per line:
//   {"id": ..., "text": ..., "triples": [{"head": {"text", "type"},
//    "relation": ..., "tail": {"text", "type"}}, ...]}
// Malformed lines are skipped with a diagnostic; unknown relation surfaces or
// entity types produce diagnostics but keep the document.
Dataset parse_dataset_jsonl(const std::string& jsonl_text, const Schema& schema);
Dataset load_dataset_file(const std::string& path, const Schema& schema);

std::string document_to_jsonl_line(const Document& doc);
void write_dataset_file(const std::string& path, const std::vector<Document>& docs);

// Uniform sample without replacement; indices into `dataset.documents` are
// drawn with a partial Fisher-Yates shuffle and returned sorted, so document
// order is preserved.
std::vector<Document> sample_subset(const Dataset& dataset, std::size_t n,
                                    std::uint64_t seed);

// Greedy pick of up to k exemplars per schema relation, walking relations in
// schema order. A relation with no candidate document is an error.
ExemplarSet select_exemplars(const Dataset& pool, const Schema& schema,
                             std::size_t per_relation, std::uint64_t seed);

// Uniform integer in [0, bound) via rejection sampling, stable across
// platforms for a given engine state.
std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t bound);

}  // namespace kgcodec
