#include "crm/cli.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "crm/runstore.hpp"
#include "crm/sha256.hpp"

namespace crm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

int cmd_validate(const ValidateArgs& args, std::ostream& out) {
    auto items = load_dataset(args.dataset);
    bool any_errors = false;
    for (const auto& item : items) {
        ValidationReport report;
        try {
            Image img = load_image(args.images / item.image_ref);
            report = validate_item(item, img.dims());
        } catch (const Error& e) {
            report.item_id = item.id;
            report.errors.push_back({e.code(), e.what()});
        }
        std::string line = report.item_id + ": ";
        if (report.ok() && report.warnings.empty()) {
            line += "ok";
        } else {
            for (const auto& err : report.errors) line += "error[" + err.code + "] ";
            for (const auto& warning : report.warnings)
                line += "warning[" + warning.code + "] ";
            while (!line.empty() && line.back() == ' ') line.pop_back();
        }
        out << line << "\n";
        if (!report.ok()) any_errors = true;
    }
    out << items.size() << " item(s) checked\n";
    return any_errors ? kExitFindings : kExitOk;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

namespace {

std::string generation_config_snapshot(const GenerationConfig& config, uint64_t mask_seed) {
    json j = {{"provider", config.provider == ProviderKind::Mock ? "mock" : "http"},
              {"endpoint", config.endpoint},
              {"model", config.model_name},
              {"cot_temperature", config.cot_temperature},
              {"answer_temperature", config.answer_temperature},
              {"max_tokens_cot", config.max_tokens_cot},
              {"max_tokens_answer", config.max_tokens_answer},
              {"mask_seed", mask_seed}};
    return j.dump();
}

std::unique_ptr<Provider> make_provider(const std::string& kind,
                                        const GenerationConfig& config,
                                        const fs::path& fixtures) {
    if (kind == "mock") {
        if (fixtures.empty())
            throw Error("invalid-argument", "mock provider requires --fixtures");
        return std::make_unique<MockProvider>(MockProvider::from_file(fixtures));
    }
    if (kind == "http") return std::make_unique<HttpChatProvider>(config);
    throw Error("invalid-argument", "unknown provider '" + kind + "'");
}

}  // namespace

int cmd_run(const RunArgs& args, std::ostream& out) {
    GenerationConfig config;
    config.provider = args.provider == "http" ? ProviderKind::HttpChat : ProviderKind::Mock;
    config.endpoint = args.endpoint;
    config.model_name = args.model;
    config.validate();

    auto conditions = args.conditions;
    if (conditions.empty()) conditions = {Condition::Baseline};
    std::string run_id = args.run_id.empty() ? "run" : args.run_id;
    std::string snapshot = generation_config_snapshot(config, args.mask_seed);

    auto items = load_dataset(args.dataset);
    RunStore store = RunStore::exists(args.run_root, run_id)
                         ? RunStore::open(args.run_root, run_id)
                         : RunStore::init_run(args.run_root, run_id, items, conditions,
                                              snapshot);
    for (Condition c : conditions) store.add_condition(c);
    store.resume(snapshot);  // re-enqueues Failed work; verifies the snapshot

    auto provider = make_provider(args.provider, config, args.fixtures);
    RunOptions options;
    options.concurrency = args.concurrency;
    options.rate_limit_per_second = args.rate_limit;
    options.mask_seed = args.mask_seed;

    size_t failed = 0;
    for (Condition c : conditions) {
        RunOutcome outcome = run_condition(store, args.images, c, *provider, config, options);
        out << to_string(c) << ": " << outcome.done << " done, " << outcome.failed
            << " failed, " << outcome.cache_hits << " cache hit(s)\n";
        for (const auto& failure : outcome.failures) out << "  failed " << failure << "\n";
        failed += outcome.failed;
    }
    return failed == 0 ? kExitOk : kExitFindings;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

int cmd_score(const ScoreArgs& args, std::ostream& out) {
    RunStore masked_store = RunStore::open(args.run_root, args.run_id);
    std::string baseline_id =
        args.baseline_run_id.empty() ? args.run_id : args.baseline_run_id;
    RunStore baseline_store = RunStore::open(args.run_root, baseline_id);

    ScoringConfig config;
    config.step_threshold = args.step_threshold;
    config.answer_threshold = args.answer_threshold;
    config.match_floor = args.match_floor;
    config.hallucination_mode = args.hallucination_mode == "judge"
                                    ? HallucinationMode::Judge
                                    : HallucinationMode::Heuristic;

    RefusalLexicon lexicon = args.refusal_lexicon.empty()
                                 ? RefusalLexicon::builtin()
                                 : RefusalLexicon::load(args.refusal_lexicon);

    JudgeFn judge;
    std::shared_ptr<Provider> judge_provider;
    GenerationConfig judge_config;
    if (config.hallucination_mode == HallucinationMode::Judge) {
        judge_config.endpoint = args.judge_endpoint;
        judge_config.model_name = args.judge_model;
        judge_provider = make_provider(args.judge_provider, judge_config, args.judge_fixtures);
        judge = [judge_provider, judge_config](const std::string& prompt) {
            ChatRequest request;
            request.model_name = judge_config.model_name;
            request.prompt = prompt;
            request.image_hash = sha256_hex(std::string());
            request.temperature = 0.0;
            request.max_tokens = 16;
            try {
                return judge_provider->generate(request).text;
            } catch (const Error& e) {
                throw Error("judge-unavailable", e.what());
            }
        };
    }

    auto backend = make_backend(args.backend);

    auto conditions = args.conditions;
    if (conditions.empty()) {
        for (Condition c : masked_store.conditions()) {
            if (c != Condition::Baseline) conditions.push_back(c);
        }
    }
    if (conditions.empty())
        throw Error("invalid-argument", "run has no masked conditions to score");

    size_t problems = 0;
    for (Condition c : conditions) {
        ScoreOutcome outcome = score_condition(masked_store, baseline_store, c, *backend,
                                               config, lexicon, judge);
        out << to_string(c) << ": scored " << outcome.attributions.size() << " item(s), "
            << outcome.problems.size() << " problem(s)\n";
        for (const auto& p : outcome.problems)
            out << "  " << p.code << " " << p.item_id << ": " << p.message << "\n";
        problems += outcome.problems.size();

        json meta = {{"backend", backend->id()},
                     {"step_threshold", config.step_threshold},
                     {"answer_threshold", config.answer_threshold},
                     {"match_floor", config.match_floor},
                     {"hallucination_mode",
                      config.hallucination_mode == HallucinationMode::Judge ? "judge"
                                                                            : "heuristic"},
                     {"refusal_lexicon", lexicon.version()},
                     {"baseline_run", baseline_id}};
        write_file_atomic(masked_store.run_dir() / ("scoring_" + to_string(c) + ".json"),
                          meta.dump(2) + "\n");
    }
    return problems == 0 ? kExitOk : kExitFindings;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

namespace {

uint64_t mask_seed_from_manifest(const RunStore& store) {
    try {
        json config = json::parse(store.manifest().config_json);
        return config.value("mask_seed", uint64_t{0});
    } catch (const json::exception&) {
        return 0;
    }
}

ReportMeta report_meta_for(const RunStore& store, Condition condition) {
    ReportMeta meta;
    meta.run_id = store.manifest().run_id;
    meta.mask_seed = mask_seed_from_manifest(store);
    fs::path meta_path = store.run_dir() / ("scoring_" + to_string(condition) + ".json");
    if (fs::exists(meta_path)) {
        json j = json::parse(read_file(meta_path));
        meta.backend_id = j.value("backend", "");
        meta.step_threshold = j.value("step_threshold", 0.0);
        meta.answer_threshold = j.value("answer_threshold", 0.0);
    }
    return meta;
}

std::string format_extension(ReportFormat format) {
    switch (format) {
        case ReportFormat::Markdown: return "md";
        case ReportFormat::Csv: return "csv";
        case ReportFormat::Json: return "json";
    }
    return "md";
}

}  // namespace

int cmd_report(const ReportArgs& args, std::ostream& out) {
    RunStore store = RunStore::open(args.run_root, args.run_id);
    ReportFormat format = report_format_from_string(args.format);

    std::map<Condition, MetricsSummary> summaries;
    for (Condition c : store.conditions()) {
        if (c == Condition::Baseline) continue;
        auto attributions = load_attributions(store, c);
        if (attributions.empty()) continue;
        summaries[c] = aggregate(attributions);
    }
    if (summaries.empty())
        throw Error("unscored-run", "no attributions found; run `crm score` first");

    std::string ext = format_extension(format);
    for (const auto& [condition, summary] : summaries) {
        ReportMeta meta = report_meta_for(store, condition);
        std::string text = render_report(summary, meta, format);
        out << text;
        if (format == ReportFormat::Markdown) out << "\n";
        write_file_atomic(store.run_dir() / ("report_" + to_string(condition) + "." + ext),
                          text);
    }
    if (summaries.count(Condition::Specific) && summaries.count(Condition::Random)) {
        ConditionComparison comparison = compare_conditions(
            summaries[Condition::Specific], summaries[Condition::Random]);
        ReportMeta meta = report_meta_for(store, Condition::Specific);
        std::string text = render_report(comparison, meta, format);
        out << text;
        write_file_atomic(store.run_dir() / ("report_compare." + ext), text);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// diff-item
// ---------------------------------------------------------------------------

namespace {

std::string step_label(const ReasoningStep& step) {
    return to_string(step.tag) + std::to_string(step.index);
}

std::string truncate(const std::string& s, size_t width) {
    if (s.size() <= width) return s;
    return s.substr(0, width - 3) + "...";
}

}  // namespace

int cmd_diff_item(const DiffItemArgs& args, std::ostream& out) {
    RunStore store = RunStore::open(args.run_root, args.run_id);
    std::string baseline_id =
        args.baseline_run_id.empty() ? args.run_id : args.baseline_run_id;
    RunStore baseline_store = RunStore::open(args.run_root, baseline_id);
    Condition condition = condition_from_string(args.condition);

    auto attribution = store.read_attribution(args.item_id, condition);
    if (!attribution)
        throw Error("unknown-item",
                    "no attribution for item '" + args.item_id + "' under " +
                        to_string(condition) + " (run `crm score` first)");

    auto base_cot =
        baseline_store.read_generation(args.item_id, Condition::Baseline, GenerationStage::CoT);
    auto base_answer = baseline_store.read_generation(args.item_id, Condition::Baseline,
                                                      GenerationStage::Answer);
    auto masked_cot = store.read_generation(args.item_id, condition, GenerationStage::CoT);
    auto masked_answer =
        store.read_generation(args.item_id, condition, GenerationStage::Answer);
    if (!base_cot || !masked_cot || !base_answer || !masked_answer)
        throw Error("unknown-item", "generation records missing for '" + args.item_id + "'");

    ReasoningTrace base = parse_trace(base_cot->raw_text);
    ReasoningTrace masked = parse_trace(masked_cot->raw_text);

    out << "item " << args.item_id << " (" << to_string(condition) << " vs baseline)\n";
    if (attribution->refusal) out << "!! model refused the masked reasoning\n";
    out << "\n";

    std::map<size_t, std::pair<size_t, double>> pair_of_base;
    for (const auto& p : attribution->alignment.pairs)
        pair_of_base[p.baseline_index] = {p.masked_index, p.similarity};

    std::ostringstream table;
    table << std::left << std::setw(6) << "#" << std::setw(13) << "status" << std::setw(6)
          << "sim" << std::setw(44) << "baseline" << "masked\n";
    auto sim_str = [](double v) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };
    std::vector<bool> masked_used(masked.steps.size(), false);
    for (size_t i = 0; i < base.steps.size(); ++i) {
        std::string masked_cell = "-";
        std::string sim_cell = "-";
        auto it = pair_of_base.find(i);
        if (it != pair_of_base.end()) {
            masked_used[it->second.first] = true;
            masked_cell = step_label(masked.steps[it->second.first]) + " " +
                          masked.steps[it->second.first].text;
            sim_cell = sim_str(it->second.second);
        }
        StepStatus status = attribution->alignment.baseline_statuses[i];
        table << std::setw(6) << step_label(base.steps[i]) << std::setw(13)
              << to_string(status) << std::setw(6) << sim_cell << std::setw(44)
              << truncate(base.steps[i].text, 42) << truncate(masked_cell, 42) << "\n";
    }
    for (size_t j = 0; j < masked.steps.size(); ++j) {
        if (masked_used[j]) continue;
        table << std::setw(6) << "-" << std::setw(13) << "new" << std::setw(6) << "-"
              << std::setw(44) << "-"
              << truncate(step_label(masked.steps[j]) + " " + masked.steps[j].text, 42)
              << "\n";
    }
    out << table.str() << "\n";

    out << "baseline answer: " << base_answer->raw_text << "\n";
    out << "masked answer:   " << masked_answer->raw_text << "\n\n";
    out << "answer_flipped=" << (attribution->answer_flipped ? "yes" : "no")
        << " (similarity " << sim_str(attribution->answer_similarity) << ")"
        << "  step_disrupted=" << (attribution->step_disrupted ? "yes" : "no")
        << "  hallucinated=" << (attribution->hallucinated ? "yes" : "no")
        << "  region_attribution=" << to_string(attribution->region_attribution) << "\n";
    for (const auto& note : attribution->notes) out << "note: " << note << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// gen-fixtures
// ---------------------------------------------------------------------------

int cmd_gen_fixtures(const GenFixturesArgs& args, std::ostream& out) {
    auto bundle = fixtures::generate_bundle(args.out_dir, fixtures::mode_from_string(args.mode),
                                            args.mask_seed);
    out << "wrote " << bundle.item_count << " items under " << args.out_dir.string() << "\n";
    out << "  dataset:  " << bundle.dataset_path.string() << "\n";
    out << "  images:   " << bundle.images_dir.string() << "\n";
    out << "  fixtures: " << bundle.fixtures_path.string() << "\n";
    return kExitOk;
}

}  // namespace crm::cli
