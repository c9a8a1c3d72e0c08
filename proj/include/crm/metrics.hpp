#pragma once

#include <map>
#include <string>
#include <vector>

#include "crm/attribution.hpp"

namespace crm {

struct Rate {
    double p = 0.0;
    double se = 0.0;

    bool operator==(const Rate&) const = default;
};

// Corpus-level rates for one masked condition.
struct MetricsSummary {
    Condition condition = Condition::Specific;
    size_t n = 0;  // items included in the rates
    std::map<std::string, Rate> rates;  // answer_flip, step_disruption, hallucination
    std::map<std::string, size_t> attribution_histogram;  // bucket -> count
    std::map<std::string, size_t> excluded;               // reason -> count

    bool operator==(const MetricsSummary&) const = default;
};

// Binomial standard error sqrt(p(1-p)/n).
double standard_error(double p, size_t n);

// Fold attributions (all one condition) into rates. Items whose baseline
// generation was a refusal are excluded from every rate and reported under
// excluded["refusal-on-baseline"]; hallucination-unassessable items stay in
// the denominators (their verdict is false by contract) and are surfaced
// under excluded["unassessable"] so the hallucination rate can be read with
// that caveat.
MetricsSummary aggregate(const std::vector<ItemAttribution>& attributions);

struct MetricDelta {
    double specific = 0.0;
    double random = 0.0;
    double delta = 0.0;  // specific - random, in proportion units
};

struct ConditionComparison {
    MetricsSummary specific;
    MetricsSummary random;
    std::map<std::string, MetricDelta> deltas;
};

ConditionComparison compare_conditions(const MetricsSummary& specific,
                                       const MetricsSummary& random);

enum class ReportFormat { Markdown, Csv, Json };

ReportFormat report_format_from_string(const std::string& s);

// Run-level context stamped into reports.
struct ReportMeta {
    std::string backend_id;
    double step_threshold = 0.0;
    double answer_threshold = 0.0;
    uint64_t mask_seed = 0;
    std::string run_id;
};

std::string render_report(const MetricsSummary& summary, const ReportMeta& meta,
                          ReportFormat format);
std::string render_report(const ConditionComparison& comparison, const ReportMeta& meta,
                          ReportFormat format);

// JSON round-trip for summaries.
std::string summary_to_json(const MetricsSummary& summary);
MetricsSummary summary_from_json(const std::string& json_text);

// "58.78 ± 1.23%" formatting used by the tables.
std::string format_rate_percent(const Rate& rate);

}  // namespace crm
