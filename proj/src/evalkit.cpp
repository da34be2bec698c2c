#include "kgcodec/evalkit.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "json.hpp"

namespace kgcodec {

std::string triple_match_key(const RelationTriple& t, const MatchOptions& opts) {
    auto piece = [&](const std::string& s) {
        std::string out = normalize_surface(s);
        if (opts.case_insensitive) out = fold_case_ascii(out);
        return out;
    };
    std::string rel = piece(t.relation);
    auto it = opts.relation_map.find(rel);
    if (it != opts.relation_map.end()) rel = piece(it->second);
    return piece(t.head.text) + '\x1f' + rel + '\x1f' + piece(t.tail.text);
}

namespace {

void finish_metrics(Metrics& m) {
    const double tp = static_cast<double>(m.tp);
    m.precision = (m.tp + m.fp) ? tp / static_cast<double>(m.tp + m.fp) : 0.0;
    m.recall = (m.tp + m.fn) ? tp / static_cast<double>(m.tp + m.fn) : 0.0;
    m.f1 = (m.precision + m.recall > 0.0)
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
}

}  // namespace

Metrics score_document(const std::vector<RelationTriple>& gold,
                       const std::vector<RelationTriple>& predicted,
                       const MatchOptions& opts) {
    std::set<std::string> gold_keys, pred_keys;
    for (const auto& t : gold) gold_keys.insert(triple_match_key(t, opts));
    for (const auto& t : predicted) pred_keys.insert(triple_match_key(t, opts));

    Metrics m;
    for (const auto& k : pred_keys)
        gold_keys.count(k) ? ++m.tp : ++m.fp;
    for (const auto& k : gold_keys)
        if (!pred_keys.count(k)) ++m.fn;
    finish_metrics(m);
    return m;
}

RunReport score_run(const Dataset& dataset,
                    const std::map<std::string, std::vector<RelationTriple>>& predictions,
                    const std::optional<std::set<std::string>>& hard_ids,
                    const MatchOptions& opts, std::size_t diagnostics_total,
                    std::size_t error_responses) {
    for (const auto& [id, _] : predictions)
        if (!dataset.find(id))
            throw ValidationError("prediction for unknown document id '" + id + "'");

    RunReport report;
    report.n_docs = dataset.documents.size();
    report.diagnostics_total = diagnostics_total;
    report.error_responses = error_responses;

    Metrics overall;
    Metrics hard;
    bool any_hard_requested = hard_ids.has_value();

    static const std::vector<RelationTriple> kEmpty;
    for (const auto& doc : dataset.documents) {
        auto it = predictions.find(doc.id);
        const auto& preds = it != predictions.end() ? it->second : kEmpty;
        Metrics m = score_document(doc.gold, preds, opts);
        overall.tp += m.tp;
        overall.fp += m.fp;
        overall.fn += m.fn;
        if (any_hard_requested && hard_ids->count(doc.id)) {
            hard.tp += m.tp;
            hard.fp += m.fp;
            hard.fn += m.fn;
        }
        report.per_doc.emplace(doc.id, std::move(m));
    }
    finish_metrics(overall);
    report.overall = overall;
    if (any_hard_requested) {
        finish_metrics(hard);
        report.hard_overall = hard;
    }
    return report;
}

namespace {

MetricStats stats_of(const std::vector<double>& xs) {
    MetricStats s;
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.stdev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

AggregateStats aggregate_metrics(const std::vector<Metrics>& ms) {
    std::vector<double> p, r, f;
    for (const auto& m : ms) {
        p.push_back(m.precision);
        r.push_back(m.recall);
        f.push_back(m.f1);
    }
    return {stats_of(p), stats_of(r), stats_of(f)};
}

nlohmann::json metrics_to_json(const Metrics& m) {
    return {{"tp", m.tp},           {"fp", m.fp},         {"fn", m.fn},
            {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

nlohmann::json stats_to_json(const AggregateStats& s) {
    return {{"precision", {{"mean", s.precision.mean}, {"stdev", s.precision.stdev}}},
            {"recall", {{"mean", s.recall.mean}, {"stdev", s.recall.stdev}}},
            {"f1", {{"mean", s.f1.mean}, {"stdev", s.f1.stdev}}}};
}

}  // namespace

AggregateReport aggregate_runs(const std::vector<RunReport>& runs) {
    if (runs.empty()) throw ValidationError("cannot aggregate zero runs");

    std::set<std::string> first_ids;
    for (const auto& [id, _] : runs.front().per_doc) first_ids.insert(id);
    for (std::size_t i = 1; i < runs.size(); ++i) {
        std::set<std::string> ids;
        for (const auto& [id, _] : runs[i].per_doc) ids.insert(id);
        if (ids != first_ids)
            throw ValidationError("runs score different document sets");
    }

    AggregateReport agg;
    agg.n_runs = runs.size();
    std::vector<Metrics> overall, hard;
    bool all_hard = true;
    for (const auto& run : runs) {
        overall.push_back(run.overall);
        if (run.hard_overall)
            hard.push_back(*run.hard_overall);
        else
            all_hard = false;
    }
    agg.overall = aggregate_metrics(overall);
    if (all_hard && !hard.empty()) agg.hard_overall = aggregate_metrics(hard);
    return agg;
}

std::string run_report_to_json(const RunReport& report, bool pretty) {
    nlohmann::json j;
    j["overall"] = metrics_to_json(report.overall);
    if (report.hard_overall) j["hard_overall"] = metrics_to_json(*report.hard_overall);
    j["per_doc"] = nlohmann::json::object();
    for (const auto& [id, m] : report.per_doc) j["per_doc"][id] = metrics_to_json(m);
    j["n_docs"] = report.n_docs;
    j["diagnostics_total"] = report.diagnostics_total;
    j["error_responses"] = report.error_responses;
    return pretty ? j.dump(2) : j.dump();
}

std::string aggregate_report_to_json(const AggregateReport& report, bool pretty) {
    nlohmann::json j;
    j["n_runs"] = report.n_runs;
    j["overall"] = stats_to_json(report.overall);
    if (report.hard_overall) j["hard_overall"] = stats_to_json(*report.hard_overall);
    return pretty ? j.dump(2) : j.dump();
}

namespace {

void append_block(std::string& out, const char* title,
                  const std::vector<const Metrics*>& rows, const AggregateStats& stats) {
    char buf[160];
    out += title;
    out += "\n  run  precision     recall         f1\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "  %3zu     %.4f     %.4f     %.4f\n", i + 1,
                      rows[i]->precision, rows[i]->recall, rows[i]->f1);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), " mean     %.4f     %.4f     %.4f\n",
                  stats.precision.mean, stats.recall.mean, stats.f1.mean);
    out += buf;
    std::snprintf(buf, sizeof(buf), "stdev     %.4f     %.4f     %.4f\n",
                  stats.precision.stdev, stats.recall.stdev, stats.f1.stdev);
    out += buf;
}

}  // namespace

std::string format_report_table(const std::vector<RunReport>& runs,
                                const AggregateReport& aggregate) {
    std::string out;
    std::vector<const Metrics*> overall;
    for (const auto& r : runs) overall.push_back(&r.overall);
    append_block(out, "overall", overall, aggregate.overall);

    if (aggregate.hard_overall) {
        std::vector<const Metrics*> hard;
        for (const auto& r : runs)
            if (r.hard_overall) hard.push_back(&*r.hard_overall);
        if (hard.size() == runs.size()) {
            out += "\n";
            append_block(out, "hard subset", hard, *aggregate.hard_overall);
        }
    }
    return out;
}

}  // namespace kgcodec
