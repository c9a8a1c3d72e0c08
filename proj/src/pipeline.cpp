#include "crm/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <thread>

#include "crm/masking.hpp"
#include "crm/prompts.hpp"
#include "crm/sha256.hpp"

namespace crm {

namespace fs = std::filesystem;

uint64_t derive_item_seed(uint64_t mask_seed, const std::string& item_id) {
    std::string digest = sha256_hex(std::to_string(mask_seed) + ":" + item_id);
    uint64_t seed = 0;
    for (int i = 0; i < 16; ++i) {
        char c = digest[i];
        seed = seed * 16 + static_cast<uint64_t>(c <= '9' ? c - '0' : c - 'a' + 10);
    }
    return seed;
}

namespace {

struct ItemWork {
    DatasetItem item;
    bool need_cot = false;
    bool need_answer = false;
};

// Original or masked raster bytes for one item under one condition. Masked
// variants are persisted as a side effect so the run is inspectable.
std::vector<unsigned char> prepare_image(RunStore& store, const fs::path& images_dir,
                                         const DatasetItem& item, Condition condition,
                                         const RunOptions& options) {
    Image original = load_image(images_dir / item.image_ref);
    if (condition == Condition::Baseline) return encode_ppm(original);
    MaskedImage masked =
        condition == Condition::Specific
            ? mask_specific(original, item.important_regions)
            : mask_random(original, item.important_regions,
                          derive_item_seed(options.mask_seed, item.id));
    store.write_masked_image(item.id, condition, masked.image, masked.spec.seed);
    return encode_ppm(masked.image);
}

}  // namespace

RunOutcome run_condition(RunStore& store, const fs::path& images_dir, Condition condition,
                         Provider& provider, const GenerationConfig& config,
                         const RunOptions& options) {
    config.validate();
    RunOutcome outcome;
    std::mutex outcome_mutex;

    std::map<std::string, ItemWork> by_item;
    auto items = store.dataset();
    for (const StageKey& key : store.pending_work(condition)) {
        auto it = std::find_if(items.begin(), items.end(),
                               [&](const DatasetItem& d) { return d.id == key.item_id; });
        if (it == items.end()) continue;
        ItemWork& work = by_item[key.item_id];
        work.item = *it;
        if (key.stage == GenerationStage::CoT) work.need_cot = true;
        else work.need_answer = true;
    }
    std::vector<ItemWork> tasks;
    tasks.reserve(by_item.size());
    for (auto& [id, work] : by_item) tasks.push_back(std::move(work));

    TokenBucket bucket(std::max(1.0, options.rate_limit_per_second),
                       options.rate_limit_per_second);

    auto run_stage = [&](const DatasetItem& item, GenerationStage stage,
                         const std::vector<unsigned char>& image_ppm) {
        StageKey key{item.id, condition, stage};
        bool masked = condition != Condition::Baseline;
        std::string prompt = stage == GenerationStage::CoT
                                 ? prompts::build_cot_prompt(item.question)
                                 : prompts::build_answer_prompt(item.question, masked);
        CacheKey cache_key{
            config.model_name, sha256_hex(prompt),
            sha256_hex(std::span<const unsigned char>(image_ppm)),
            stage == GenerationStage::CoT ? config.cot_temperature
                                          : config.answer_temperature,
            stage == GenerationStage::CoT ? config.max_tokens_cot
                                          : config.max_tokens_answer};
        GenerationRecord record;
        if (auto cached = store.cache_lookup(cache_key)) {
            record = *cached;
            record.item_id = item.id;
            record.condition = condition;
            record.stage = stage;
            std::lock_guard<std::mutex> lock(outcome_mutex);
            ++outcome.cache_hits;
        } else {
            bucket.acquire();
            record = stage == GenerationStage::CoT
                         ? generate_cot(provider, config, image_ppm, item.question,
                                        item.id, condition)
                         : generate_answer(provider, config, image_ppm, item.question,
                                           item.id, condition, masked);
            store.cache_put(cache_key, record);
        }
        store.write_generation(record);
        store.mark_done(key);
        std::lock_guard<std::mutex> lock(outcome_mutex);
        ++outcome.done;
    };

    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            size_t idx = next.fetch_add(1);
            if (idx >= tasks.size()) return;
            const ItemWork& work = tasks[idx];
            std::vector<unsigned char> image_ppm;
            try {
                image_ppm = prepare_image(store, images_dir, work.item, condition, options);
            } catch (const std::exception& e) {
                for (GenerationStage stage :
                     {GenerationStage::CoT, GenerationStage::Answer}) {
                    if ((stage == GenerationStage::CoT && !work.need_cot) ||
                        (stage == GenerationStage::Answer && !work.need_answer))
                        continue;
                    store.mark_failed({work.item.id, condition, stage}, e.what());
                    std::lock_guard<std::mutex> lock(outcome_mutex);
                    ++outcome.failed;
                    outcome.failures.push_back(work.item.id + "/" + to_string(stage) +
                                               ": " + e.what());
                }
                continue;
            }
            for (GenerationStage stage : {GenerationStage::CoT, GenerationStage::Answer}) {
                if ((stage == GenerationStage::CoT && !work.need_cot) ||
                    (stage == GenerationStage::Answer && !work.need_answer))
                    continue;
                try {
                    run_stage(work.item, stage, image_ppm);
                } catch (const std::exception& e) {
                    store.mark_failed({work.item.id, condition, stage}, e.what());
                    std::lock_guard<std::mutex> lock(outcome_mutex);
                    ++outcome.failed;
                    outcome.failures.push_back(work.item.id + "/" + to_string(stage) +
                                               ": " + e.what());
                }
            }
        }
    };

    int threads = std::max(1, options.concurrency);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return outcome;
}

ScoreOutcome score_condition(RunStore& masked_store, RunStore& baseline_store,
                             Condition condition, SimilarityBackend& backend,
                             const ScoringConfig& config, const RefusalLexicon& lexicon,
                             const JudgeFn& judge) {
    if (condition == Condition::Baseline)
        throw Error("invalid-argument", "scoring contrasts a masked condition against baseline");
    ScoreOutcome outcome;
    auto items = masked_store.dataset();
    std::sort(items.begin(), items.end(),
              [](const DatasetItem& a, const DatasetItem& b) { return a.id < b.id; });
    for (const auto& item : items) {
        auto masked_cot = masked_store.read_generation(item.id, condition, GenerationStage::CoT);
        auto masked_answer =
            masked_store.read_generation(item.id, condition, GenerationStage::Answer);
        auto base_cot =
            baseline_store.read_generation(item.id, Condition::Baseline, GenerationStage::CoT);
        auto base_answer = baseline_store.read_generation(item.id, Condition::Baseline,
                                                          GenerationStage::Answer);
        if (!masked_cot || !masked_answer || !base_cot || !base_answer) {
            outcome.problems.push_back(
                {item.id, "missing-counterpart",
                 "generation records incomplete for item '" + item.id + "'"});
            continue;
        }
        ItemAttribution attribution =
            score_item(item, condition, base_cot->raw_text, base_answer->raw_text,
                       masked_cot->raw_text, masked_answer->raw_text, backend, config,
                       lexicon, judge);
        masked_store.write_attribution(attribution);
        outcome.attributions.push_back(std::move(attribution));
    }
    return outcome;
}

std::vector<ItemAttribution> load_attributions(const RunStore& store, Condition condition) {
    std::vector<ItemAttribution> out;
    auto items = store.dataset();
    std::sort(items.begin(), items.end(),
              [](const DatasetItem& a, const DatasetItem& b) { return a.id < b.id; });
    for (const auto& item : items) {
        if (auto a = store.read_attribution(item.id, condition)) out.push_back(std::move(*a));
    }
    return out;
}

}  // namespace crm
