#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

#include "kgcodec/core.hpp"

namespace kgcodec {

struct RestructureOptions {
    std::size_t records_per_shard = 1000;
    // Used when a type string cannot become a class name (empty, reserved, or
    // not an identifier after camelizing) and for the UNKNOWN sentinel.
    std::string fallback_entity_code = "Thing";
};

// "adverse_effect" -> "AdverseEffect"; splits on non-alphanumerics,
// capitalizes each part, lowercases the rest.
std::string camelize_type(std::string_view etype);

std::string entity_code_for_type(std::string_view etype,
                                 const RestructureOptions& opts);

// One code-format block for an aligned sentence: docstring'd Extract class
// plus its populated triple list.
std::string restructure_record(const Document& doc, const RestructureOptions& opts);

struct RestructureStats {
    std::size_t sentences = 0;
    std::size_t triples = 0;
    std::size_t distinct_relations = 0;
    std::size_t skipped = 0;
};

// Reads dataset-format JSONL from `in` and writes code-format blocks into
// out_dir/shard-NNNNN.txt, one blank line between blocks. Malformed lines are
// skipped and counted; every input line is either emitted or skipped. Writes
// a stats.json sidecar into out_dir.
RestructureStats restructure_stream(std::istream& in, const std::string& out_dir,
                                    const RestructureOptions& opts);

RestructureStats restructure_file(const std::string& in_path,
                                  const std::string& out_dir,
                                  const RestructureOptions& opts);

std::string restructure_stats_to_json(const RestructureStats& stats,
                                      bool pretty = false);

}  // namespace kgcodec
