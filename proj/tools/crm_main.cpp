#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crm/cli.hpp"
#include "crm/error.hpp"

namespace {

std::vector<crm::Condition> parse_conditions(const std::vector<std::string>& names) {
    std::vector<crm::Condition> out;
    for (const auto& name : names) out.push_back(crm::condition_from_string(name));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crm - contrastive region masking harness for multimodal CoT models"};
    app.require_subcommand(1);

    crm::cli::ValidateArgs validate_args;
    auto* validate = app.add_subcommand("validate", "check a dataset against its images");
    validate->add_option("--dataset", validate_args.dataset, "dataset jsonl path")->required();
    validate->add_option("--images", validate_args.images, "image directory")->required();

    crm::cli::RunArgs run_args;
    std::vector<std::string> run_conditions;
    auto* run = app.add_subcommand("run", "generate CoT + answers for one or more conditions");
    run->add_option("--dataset", run_args.dataset, "dataset jsonl path")->required();
    run->add_option("--images", run_args.images, "image directory")->required();
    run->add_option("--run-dir", run_args.run_root, "run store root (default runs)");
    run->add_option("--run-id", run_args.run_id, "run identifier (default run)");
    run->add_option("--condition", run_conditions,
                    "baseline|specific|random (repeatable)")
        ->required();
    run->add_option("--provider", run_args.provider, "mock|http (default mock)");
    run->add_option("--fixtures", run_args.fixtures, "mock provider fixture file");
    run->add_option("--endpoint", run_args.endpoint, "chat completions URL (http provider)");
    run->add_option("--model", run_args.model, "model name");
    run->add_option("--concurrency", run_args.concurrency, "parallel generations (default 4)");
    run->add_option("--rate-limit", run_args.rate_limit,
                    "max provider calls per second (default unlimited)");
    run->add_option("--mask-seed", run_args.mask_seed, "random-mask sampler seed (default 42)");

    crm::cli::ScoreArgs score_args;
    std::vector<std::string> score_conditions;
    auto* score = app.add_subcommand("score", "contrast masked runs against a baseline run");
    score->add_option("--run-dir", score_args.run_root, "run store root (default runs)");
    score->add_option("--run", score_args.run_id, "masked run id")->required();
    score->add_option("--baseline-run", score_args.baseline_run_id,
                      "baseline run id (default: same run)");
    score->add_option("--condition", score_conditions,
                      "condition(s) to score (default: all masked)");
    score->add_option("--backend", score_args.backend,
                      "lexical | http:<endpoint>[#model] (default lexical)");
    score->add_option("--step-threshold", score_args.step_threshold,
                      "step similarity threshold (default 0.80)");
    score->add_option("--answer-threshold", score_args.answer_threshold,
                      "answer similarity threshold (default 0.90)");
    score->add_option("--match-floor", score_args.match_floor,
                      "minimum similarity for step pairing (default 0.30)");
    score->add_option("--hallucination-mode", score_args.hallucination_mode,
                      "heuristic|judge (default heuristic)");
    score->add_option("--refusal-lexicon", score_args.refusal_lexicon,
                      "override the built-in refusal phrase file");
    score->add_option("--judge-provider", score_args.judge_provider, "mock|http");
    score->add_option("--judge-fixtures", score_args.judge_fixtures,
                      "fixture file for a mock judge");
    score->add_option("--judge-endpoint", score_args.judge_endpoint, "judge chat URL");
    score->add_option("--judge-model", score_args.judge_model, "judge model name");

    crm::cli::ReportArgs report_args;
    auto* report = app.add_subcommand("report", "render corpus-level metric tables");
    report->add_option("--run-dir", report_args.run_root, "run store root (default runs)");
    report->add_option("--run", report_args.run_id, "run id")->required();
    report->add_option("--format", report_args.format, "md|csv|json (default md)");

    crm::cli::DiffItemArgs diff_args;
    auto* diff = app.add_subcommand("diff-item", "side-by-side trace diff for one item");
    diff->add_option("--run-dir", diff_args.run_root, "run store root (default runs)");
    diff->add_option("--run", diff_args.run_id, "masked run id")->required();
    diff->add_option("--baseline-run", diff_args.baseline_run_id,
                     "baseline run id (default: same run)");
    diff->add_option("--condition", diff_args.condition, "specific|random (default specific)");
    diff->add_option("--item", diff_args.item_id, "item id")->required();

    crm::cli::GenFixturesArgs fixtures_args;
    auto* fixtures = app.add_subcommand(
        "gen-fixtures", "write the bundled 6-item demo dataset + mock fixtures");
    fixtures->add_option("--out", fixtures_args.out_dir, "output directory")->required();
    fixtures->add_option("--mode", fixtures_args.mode,
                         "normal|identity|scrambled (default normal)");
    fixtures->add_option("--mask-seed", fixtures_args.mask_seed,
                         "seed baked into the fixture hashes (default 42)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return crm::cli::cmd_validate(validate_args, std::cout);
        if (run->parsed()) {
            run_args.conditions = parse_conditions(run_conditions);
            return crm::cli::cmd_run(run_args, std::cout);
        }
        if (score->parsed()) {
            score_args.conditions = parse_conditions(score_conditions);
            return crm::cli::cmd_score(score_args, std::cout);
        }
        if (report->parsed()) return crm::cli::cmd_report(report_args, std::cout);
        if (diff->parsed()) return crm::cli::cmd_diff_item(diff_args, std::cout);
        if (fixtures->parsed()) return crm::cli::cmd_gen_fixtures(fixtures_args, std::cout);
    } catch (const crm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return crm::cli::kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return crm::cli::kExitFailure;
    }
    return crm::cli::kExitFailure;
}
