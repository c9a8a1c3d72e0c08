#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "crm/attribution.hpp"
#include "crm/fixtures.hpp"
#include "crm/metrics.hpp"
#include "crm/model_client.hpp"
#include "crm/pipeline.hpp"

namespace crm::cli {

// Exit codes: 0 success, 1 validation/scoring findings, 2 operational failure
// (thrown Errors are mapped to 2 by the entry point).
inline constexpr int kExitOk = 0;
inline constexpr int kExitFindings = 1;
inline constexpr int kExitFailure = 2;

struct ValidateArgs {
    std::filesystem::path dataset;
    std::filesystem::path images;
};

int cmd_validate(const ValidateArgs& args, std::ostream& out);

struct RunArgs {
    std::filesystem::path dataset;
    std::filesystem::path images;
    std::filesystem::path run_root = "runs";
    std::string run_id;  // defaults to "run"
    std::vector<Condition> conditions;
    std::string provider = "mock";  // mock | http
    std::filesystem::path fixtures;  // mock provider fixture file
    std::string endpoint;
    std::string model = "mock";
    int concurrency = 4;
    double rate_limit = 0.0;
    uint64_t mask_seed = 42;
};

int cmd_run(const RunArgs& args, std::ostream& out);

struct ScoreArgs {
    std::filesystem::path run_root = "runs";
    std::string run_id;
    std::string baseline_run_id;  // defaults to run_id
    std::vector<Condition> conditions;  // default: every masked condition present
    std::string backend = "lexical";
    double step_threshold = 0.80;
    double answer_threshold = 0.90;
    double match_floor = 0.30;
    std::string hallucination_mode = "heuristic";  // heuristic | judge
    std::filesystem::path refusal_lexicon;         // optional override
    std::string judge_provider = "http";           // judge mode only
    std::filesystem::path judge_fixtures;
    std::string judge_endpoint;
    std::string judge_model = "judge";
};

int cmd_score(const ScoreArgs& args, std::ostream& out);

struct ReportArgs {
    std::filesystem::path run_root = "runs";
    std::string run_id;
    std::string format = "md";
};

int cmd_report(const ReportArgs& args, std::ostream& out);

struct DiffItemArgs {
    std::filesystem::path run_root = "runs";
    std::string run_id;
    std::string baseline_run_id;  // defaults to run_id
    std::string condition = "specific";
    std::string item_id;
};

int cmd_diff_item(const DiffItemArgs& args, std::ostream& out);

struct GenFixturesArgs {
    std::filesystem::path out_dir;
    std::string mode = "normal";
    uint64_t mask_seed = 42;
};

int cmd_gen_fixtures(const GenFixturesArgs& args, std::ostream& out);

}  // namespace crm::cli
