#include "crm/metrics.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "crm/error.hpp"

namespace crm {

using nlohmann::json;

double standard_error(double p, size_t n) {
    if (n == 0) throw Error("invalid-argument", "standard error undefined for n = 0");
    if (p < 0.0 || p > 1.0) throw Error("invalid-argument", "proportion outside [0,1]");
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

MetricsSummary aggregate(const std::vector<ItemAttribution>& attributions) {
    if (attributions.empty()) throw Error("empty-input", "no attributions to aggregate");
    MetricsSummary summary;
    summary.condition = attributions.front().condition;
    for (const auto& a : attributions) {
        if (a.condition != summary.condition)
            throw Error("mixed-conditions", "attributions span multiple conditions");
    }

    summary.attribution_histogram = {{"correct", 0}, {"partial", 0}, {"incorrect", 0},
                                     {"not-applicable", 0}};
    size_t flips = 0, disruptions = 0, hallucinations = 0;
    for (const auto& a : attributions) {
        if (a.baseline_refusal) {
            ++summary.excluded["refusal-on-baseline"];
            continue;
        }
        if (a.has_note("hallucination-unassessable")) ++summary.excluded["unassessable"];
        ++summary.n;
        if (a.answer_flipped) ++flips;
        if (a.step_disrupted) ++disruptions;
        if (a.hallucinated) ++hallucinations;
        ++summary.attribution_histogram[to_string(a.region_attribution)];
    }
    if (summary.n > 0) {
        auto rate = [&](size_t count) {
            double p = static_cast<double>(count) / static_cast<double>(summary.n);
            return Rate{p, standard_error(p, summary.n)};
        };
        summary.rates["answer_flip"] = rate(flips);
        summary.rates["step_disruption"] = rate(disruptions);
        summary.rates["hallucination"] = rate(hallucinations);
    }
    return summary;
}

ConditionComparison compare_conditions(const MetricsSummary& specific,
                                       const MetricsSummary& random) {
    ConditionComparison cmp;
    cmp.specific = specific;
    cmp.random = random;
    for (const auto& [metric, rate] : specific.rates) {
        MetricDelta d;
        d.specific = rate.p;
        auto it = random.rates.find(metric);
        d.random = it == random.rates.end() ? 0.0 : it->second.p;
        d.delta = d.specific - d.random;
        cmp.deltas[metric] = d;
    }
    return cmp;
}

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "md" || s == "markdown") return ReportFormat::Markdown;
    if (s == "csv") return ReportFormat::Csv;
    if (s == "json") return ReportFormat::Json;
    throw Error("invalid-argument", "unknown report format '" + s + "'");
}

namespace {

std::string pct2(double proportion) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", proportion * 100.0);
    return buf;
}

std::string num(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

json meta_to_json(const ReportMeta& meta) {
    return json{{"backend", meta.backend_id},
                {"step_threshold", meta.step_threshold},
                {"answer_threshold", meta.answer_threshold},
                {"mask_seed", meta.mask_seed},
                {"run_id", meta.run_id}};
}

json summary_to_json_obj(const MetricsSummary& s) {
    json rates = json::object();
    for (const auto& [k, r] : s.rates) rates[k] = {{"p", r.p}, {"se", r.se}};
    json hist = json::object();
    for (const auto& [k, c] : s.attribution_histogram) hist[k] = c;
    json excluded = json::object();
    for (const auto& [k, c] : s.excluded) excluded[k] = c;
    return json{{"condition", to_string(s.condition)},
                {"n", s.n},
                {"rates", rates},
                {"attribution_histogram", hist},
                {"excluded", excluded}};
}

MetricsSummary summary_from_json_obj(const json& j) {
    MetricsSummary s;
    s.condition = condition_from_string(j.at("condition").get<std::string>());
    s.n = j.at("n").get<size_t>();
    for (const auto& [k, v] : j.at("rates").items())
        s.rates[k] = Rate{v.at("p").get<double>(), v.at("se").get<double>()};
    for (const auto& [k, v] : j.at("attribution_histogram").items())
        s.attribution_histogram[k] = v.get<size_t>();
    if (j.contains("excluded")) {
        for (const auto& [k, v] : j.at("excluded").items())
            s.excluded[k] = v.get<size_t>();
    }
    return s;
}

const char* kMetricOrder[] = {"answer_flip", "step_disruption", "hallucination"};

}  // namespace

std::string format_rate_percent(const Rate& rate) {
    return pct2(rate.p) + " \xC2\xB1 " + pct2(rate.se) + "%";
}

std::string render_report(const MetricsSummary& summary, const ReportMeta& meta,
                          ReportFormat format) {
    switch (format) {
        case ReportFormat::Json: {
            json j = summary_to_json_obj(summary);
            j["meta"] = meta_to_json(meta);
            return j.dump(2) + "\n";
        }
        case ReportFormat::Csv: {
            std::string tail = "," + std::to_string(summary.n) + "," + meta.backend_id +
                               "," + num(meta.step_threshold) + "," +
                               num(meta.answer_threshold) + "," +
                               std::to_string(meta.mask_seed) + "\n";
            std::string out =
                "condition,metric,p,se,n,backend,step_threshold,answer_threshold,mask_seed\n";
            for (const char* metric : kMetricOrder) {
                auto it = summary.rates.find(metric);
                if (it == summary.rates.end()) continue;
                out += to_string(summary.condition) + "," + metric + "," + num(it->second.p) +
                       "," + num(it->second.se) + tail;
            }
            for (const auto& [bucket, count] : summary.attribution_histogram) {
                out += to_string(summary.condition) + ",attribution_" + bucket + "," +
                       std::to_string(count) + "," + tail;
            }
            return out;
        }
        case ReportFormat::Markdown: {
            std::string out;
            out += "## Metrics: " + to_string(summary.condition) + " masking\n\n";
            out += "| Metric | Rate |\n|---|---|\n";
            for (const char* metric : kMetricOrder) {
                auto it = summary.rates.find(metric);
                if (it == summary.rates.end()) continue;
                out += "| " + std::string(metric) + " | " +
                       format_rate_percent(it->second) + " |\n";
            }
            out += "\n| Region attribution | Count |\n|---|---|\n";
            for (const auto& [bucket, count] : summary.attribution_histogram)
                out += "| " + bucket + " | " + std::to_string(count) + " |\n";
            out += "\nn = " + std::to_string(summary.n);
            for (const auto& [reason, count] : summary.excluded)
                out += "; excluded " + reason + " = " + std::to_string(count);
            out += "\n\nbackend = " + meta.backend_id +
                   "; step_threshold = " + num(meta.step_threshold) +
                   "; answer_threshold = " + num(meta.answer_threshold) +
                   "; mask_seed = " + std::to_string(meta.mask_seed) + "\n";
            return out;
        }
    }
    throw Error("invalid-argument", "unhandled report format");
}

std::string render_report(const ConditionComparison& comparison, const ReportMeta& meta,
                          ReportFormat format) {
    switch (format) {
        case ReportFormat::Json: {
            json deltas = json::object();
            for (const auto& [metric, d] : comparison.deltas)
                deltas[metric] = {{"specific", d.specific},
                                  {"random", d.random},
                                  {"delta", d.delta}};
            json j = {{"specific", summary_to_json_obj(comparison.specific)},
                      {"random", summary_to_json_obj(comparison.random)},
                      {"deltas", deltas},
                      {"meta", meta_to_json(meta)}};
            return j.dump(2) + "\n";
        }
        case ReportFormat::Csv: {
            std::string tail = "," + meta.backend_id + "," + num(meta.step_threshold) +
                               "," + num(meta.answer_threshold) + "," +
                               std::to_string(meta.mask_seed) + "\n";
            std::string out =
                "metric,specific_p,random_p,delta,backend,step_threshold,answer_threshold,"
                "mask_seed\n";
            for (const char* metric : kMetricOrder) {
                auto it = comparison.deltas.find(metric);
                if (it == comparison.deltas.end()) continue;
                out += std::string(metric) + "," + num(it->second.specific) + "," +
                       num(it->second.random) + "," + num(it->second.delta) + tail;
            }
            return out;
        }
        case ReportFormat::Markdown: {
            std::string out = "## Specific vs. random masking\n\n";
            out += "| Metric | Specific | Random | Delta (pts) |\n|---|---|---|---|\n";
            for (const char* metric : kMetricOrder) {
                auto sit = comparison.specific.rates.find(metric);
                auto rit = comparison.random.rates.find(metric);
                auto dit = comparison.deltas.find(metric);
                if (sit == comparison.specific.rates.end() || dit == comparison.deltas.end())
                    continue;
                std::string random_cell =
                    rit == comparison.random.rates.end() ? "-" : format_rate_percent(rit->second);
                out += "| " + std::string(metric) + " | " + format_rate_percent(sit->second) +
                       " | " + random_cell + " | " + pct2(dit->second.delta) + " |\n";
            }
            out += "\nn(specific) = " + std::to_string(comparison.specific.n) +
                   "; n(random) = " + std::to_string(comparison.random.n) + "\n";
            out += "\nbackend = " + meta.backend_id +
                   "; step_threshold = " + num(meta.step_threshold) +
                   "; answer_threshold = " + num(meta.answer_threshold) +
                   "; mask_seed = " + std::to_string(meta.mask_seed) + "\n";
            return out;
        }
    }
    throw Error("invalid-argument", "unhandled report format");
}

std::string summary_to_json(const MetricsSummary& summary) {
    return summary_to_json_obj(summary).dump(2) + "\n";
}

MetricsSummary summary_from_json(const std::string& json_text) {
    try {
        return summary_from_json_obj(json::parse(json_text));
    } catch (const json::exception& e) {
        throw Error("manifest-corrupt", std::string("bad summary json: ") + e.what());
    }
}

}  // namespace crm
