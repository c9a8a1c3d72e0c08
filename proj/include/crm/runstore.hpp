#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crm/attribution.hpp"
#include "crm/condition.hpp"
#include "crm/dataset.hpp"
#include "crm/model_client.hpp"

namespace crm {

enum class WorkStatus { Pending, Done, Failed };

std::string to_string(WorkStatus s);
WorkStatus work_status_from_string(const std::string& s);

// One unit of generation work.
struct StageKey {
    std::string item_id;
    Condition condition = Condition::Baseline;
    GenerationStage stage = GenerationStage::CoT;

    std::string str() const;
    static StageKey parse(const std::string& s);

    auto operator<=>(const StageKey&) const = default;
};

struct RunManifest {
    std::string run_id;
    std::string created_at;
    std::string dataset_hash;
    std::string config_json;  // immutable snapshot; resume must match
    std::map<StageKey, WorkStatus> status;

    size_t count(WorkStatus s) const;
};

// Reusable-generation key: identical keys mean the call need not be repeated.
struct CacheKey {
    std::string model_name;
    std::string prompt_hash;
    std::string image_hash;
    double temperature = 0.0;
    int max_tokens = 0;

    std::string canonical() const;
    std::string id() const;  // sha256 of canonical form
};

// File-per-record layout:
//   <root>/<run_id>/manifest.json
//   <root>/<run_id>/dataset.jsonl
//   <root>/<run_id>/items/<item>/<condition>/{cot.json,answer.json,
//                                             masked_*.ppm,attribution.json}
//   <root>/cache/<key>.json           (shared across runs under one root)
// Records land via write-to-temp + rename, and a status only flips to Done
// after its record file exists.
class RunStore {
public:
    // Creates the layout and a manifest with every (item, condition, stage)
    // pending. Throws run-exists / out-dir-unwritable.
    static RunStore init_run(const std::filesystem::path& root, const std::string& run_id,
                             const std::vector<DatasetItem>& items,
                             const std::vector<Condition>& conditions,
                             const std::string& config_json);

    static RunStore open(const std::filesystem::path& root, const std::string& run_id);

    static bool exists(const std::filesystem::path& root, const std::string& run_id);

    // Adds pending work for a condition not yet in the manifest (no-op for
    // known conditions).
    void add_condition(Condition condition);

    // Failed entries back to Pending; throws config-mismatch when the
    // supplied snapshot differs from the one the run was created with.
    std::vector<StageKey> resume(const std::string& config_json);

    std::vector<StageKey> pending_work(Condition condition) const;

    void mark_done(const StageKey& key);
    void mark_failed(const StageKey& key, const std::string& message);

    const RunManifest& manifest() const { return manifest_; }
    std::vector<DatasetItem> dataset() const;
    std::vector<Condition> conditions() const;

    std::filesystem::path run_dir() const;
    std::filesystem::path item_dir(const std::string& item_id, Condition condition) const;

    void write_generation(const GenerationRecord& record);
    std::optional<GenerationRecord> read_generation(const std::string& item_id,
                                                    Condition condition,
                                                    GenerationStage stage) const;

    void write_masked_image(const std::string& item_id, Condition condition,
                            const Image& image, std::optional<uint64_t> seed);

    void write_attribution(const ItemAttribution& attribution);
    std::optional<ItemAttribution> read_attribution(const std::string& item_id,
                                                    Condition condition) const;

    std::optional<GenerationRecord> cache_lookup(const CacheKey& key) const;
    void cache_put(const CacheKey& key, const GenerationRecord& record);

private:
    RunStore(std::filesystem::path root, std::string run_id);

    void commit_manifest();

    std::filesystem::path root_;
    std::string run_id_;
    RunManifest manifest_;
    // single-writer commit point; boxed so the store stays movable
    std::unique_ptr<std::mutex> commit_mutex_;
};

std::string attribution_to_json(const ItemAttribution& attribution);
ItemAttribution attribution_from_json(const std::string& json_text);

void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace crm
