#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgcodec/core.hpp"
#include "kgcodec/datasets.hpp"

namespace kgcodec {

struct MatchOptions {
    bool case_insensitive = false;
    // Applied to both gold and predicted relation surfaces before matching;
    // surfaces absent from the map pass through unchanged.
    std::unordered_map<std::string, std::string> relation_map;
};

struct Metrics {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Matching key: normalized head text, relation surface, normalized tail text.
// Entity types never participate.
std::string triple_match_key(const RelationTriple& t, const MatchOptions& opts);

// Set-semantics micro counts for one document; duplicates on either side
// collapse before counting. Precision, recall, and F1 fall back to 0 when
// their denominators are 0.
Metrics score_document(const std::vector<RelationTriple>& gold,
                       const std::vector<RelationTriple>& predicted,
                       const MatchOptions& opts = {});

struct RunReport {
    std::map<std::string, Metrics> per_doc;
    Metrics overall;
    std::optional<Metrics> hard_overall;
    std::size_t n_docs = 0;
    std::size_t diagnostics_total = 0;
    std::size_t error_responses = 0;
};

// Scores one run against the dataset. Every prediction id must exist in the
// dataset; dataset documents without predictions score as empty.
RunReport score_run(const Dataset& dataset,
                    const std::map<std::string, std::vector<RelationTriple>>& predictions,
                    const std::optional<std::set<std::string>>& hard_ids,
                    const MatchOptions& opts, std::size_t diagnostics_total,
                    std::size_t error_responses);

struct MetricStats {
    double mean = 0.0;
    double stdev = 0.0;  // sample stdev; 0 for a single run
};

struct AggregateStats {
    MetricStats precision;
    MetricStats recall;
    MetricStats f1;
};

struct AggregateReport {
    std::size_t n_runs = 0;
    AggregateStats overall;
    std::optional<AggregateStats> hard_overall;
};

// All runs must score the same document-id set.
AggregateReport aggregate_runs(const std::vector<RunReport>& runs);

std::string run_report_to_json(const RunReport& report, bool pretty = false);
std::string aggregate_report_to_json(const AggregateReport& report, bool pretty = false);

// Human-readable summary: one row per run plus mean/stdev, four decimals.
std::string format_report_table(const std::vector<RunReport>& runs,
                                const AggregateReport& aggregate);

}  // namespace kgcodec
