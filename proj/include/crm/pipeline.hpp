#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crm/attribution.hpp"
#include "crm/model_client.hpp"
#include "crm/runstore.hpp"

namespace crm {

struct RunOptions {
    int concurrency = 4;
    double rate_limit_per_second = 0.0;  // 0 = unlimited
    uint64_t mask_seed = 0;
};

struct RunOutcome {
    size_t done = 0;
    size_t failed = 0;
    size_t cache_hits = 0;
    std::vector<std::string> failures;  // "item/stage: message"
};

// Per-item seed for the random-mask sampler, derived so items are independent
// of each other and of dataset order.
uint64_t derive_item_seed(uint64_t mask_seed, const std::string& item_id);

// Executes every non-Done (item, stage) of `condition` in the run: masks the
// image when the condition calls for it, runs CoT + answer stages through the
// provider (consulting the generation cache first), and persists records.
// Per-item failures are marked Failed and the run continues.
RunOutcome run_condition(RunStore& store, const std::filesystem::path& images_dir,
                         Condition condition, Provider& provider,
                         const GenerationConfig& config, const RunOptions& options);

struct ScoreProblem {
    std::string item_id;
    std::string code;  // missing-counterpart, ...
    std::string message;
};

struct ScoreOutcome {
    std::vector<ItemAttribution> attributions;  // sorted by item id
    std::vector<ScoreProblem> problems;
};

// Contrasts `condition` records in `masked_store` with baseline records in
// `baseline_store`, writes one attribution file per item into the masked run.
ScoreOutcome score_condition(RunStore& masked_store, RunStore& baseline_store,
                             Condition condition, SimilarityBackend& backend,
                             const ScoringConfig& config, const RefusalLexicon& lexicon,
                             const JudgeFn& judge = nullptr);

// Reads previously written attributions for a condition (sorted by item id).
std::vector<ItemAttribution> load_attributions(const RunStore& store, Condition condition);

}  // namespace crm
