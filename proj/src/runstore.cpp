#include "crm/runstore.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "crm/sha256.hpp"

namespace crm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(WorkStatus s) {
    switch (s) {
        case WorkStatus::Pending: return "pending";
        case WorkStatus::Done: return "done";
        case WorkStatus::Failed: return "failed";
    }
    return "pending";
}

WorkStatus work_status_from_string(const std::string& s) {
    if (s == "pending") return WorkStatus::Pending;
    if (s == "done") return WorkStatus::Done;
    if (s == "failed") return WorkStatus::Failed;
    throw Error("manifest-corrupt", "unknown status '" + s + "'");
}

std::string StageKey::str() const {
    return item_id + "|" + to_string(condition) + "|" + to_string(stage);
}

StageKey StageKey::parse(const std::string& s) {
    size_t p1 = s.rfind('|');
    if (p1 == std::string::npos) throw Error("manifest-corrupt", "bad stage key " + s);
    size_t p0 = s.rfind('|', p1 - 1);
    if (p0 == std::string::npos) throw Error("manifest-corrupt", "bad stage key " + s);
    StageKey key;
    key.item_id = s.substr(0, p0);
    key.condition = condition_from_string(s.substr(p0 + 1, p1 - p0 - 1));
    key.stage = stage_from_string(s.substr(p1 + 1));
    return key;
}

size_t RunManifest::count(WorkStatus s) const {
    size_t n = 0;
    for (const auto& [key, status] : status) {
        if (status == s) ++n;
    }
    return n;
}

std::string CacheKey::canonical() const {
    json j = {{"model", model_name},
              {"prompt_hash", prompt_hash},
              {"image_hash", image_hash},
              {"temperature", temperature},
              {"max_tokens", max_tokens}};
    return j.dump();
}

std::string CacheKey::id() const { return sha256_hex(canonical()); }

// ---------------------------------------------------------------------------
// file helpers
// ---------------------------------------------------------------------------

void write_file_atomic(const fs::path& path, const std::string& content) {
    static std::atomic<uint64_t> counter{0};
    fs::path tmp = path;
    tmp += ".tmp" + std::to_string(counter.fetch_add(1));
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("out-dir-unwritable", "cannot write " + tmp.string());
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw Error("out-dir-unwritable", "short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error("out-dir-unwritable", "rename failed: " + ec.message());
}

std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("file-not-found", path.string());
    std::ostringstream out;
    out << f.rdbuf();
    return out.str();
}

// ---------------------------------------------------------------------------
// attribution persistence
// ---------------------------------------------------------------------------

std::string attribution_to_json(const ItemAttribution& a) {
    json pairs = json::array();
    for (const auto& p : a.alignment.pairs)
        pairs.push_back({{"baseline", p.baseline_index},
                         {"masked", p.masked_index},
                         {"similarity", p.similarity}});
    json base_statuses = json::array();
    for (auto s : a.alignment.baseline_statuses) base_statuses.push_back(to_string(s));
    json masked_statuses = json::array();
    for (auto s : a.alignment.masked_statuses) masked_statuses.push_back(to_string(s));
    json j;
    j["format_version"] = 1;
    j["item_id"] = a.item_id;
    j["condition"] = to_string(a.condition);
    j["answer_flipped"] = a.answer_flipped;
    j["answer_similarity"] = a.answer_similarity;
    j["step_disrupted"] = a.step_disrupted;
    j["hallucinated"] = a.hallucinated;
    j["region_attribution"] = to_string(a.region_attribution);
    j["alignment"] = {{"pairs", pairs},
                      {"baseline_statuses", base_statuses},
                      {"masked_statuses", masked_statuses}};
    j["refusal"] = a.refusal;
    j["baseline_refusal"] = a.baseline_refusal;
    j["gt_step_similarity"] = a.gt_step_similarity;
    j["backend"] = a.backend_id;
    j["notes"] = a.notes;
    return j.dump(2) + "\n";
}

namespace {

StepStatus step_status_from_string(const std::string& s) {
    if (s == "unchanged") return StepStatus::Unchanged;
    if (s == "modified") return StepStatus::Modified;
    if (s == "disappeared") return StepStatus::Disappeared;
    if (s == "new") return StepStatus::New;
    throw Error("store-corrupt", "unknown step status '" + s + "'");
}

RegionAttribution region_attribution_from_string(const std::string& s) {
    if (s == "correct") return RegionAttribution::Correct;
    if (s == "partial") return RegionAttribution::Partial;
    if (s == "incorrect") return RegionAttribution::Incorrect;
    if (s == "not-applicable") return RegionAttribution::NotApplicable;
    throw Error("store-corrupt", "unknown region attribution '" + s + "'");
}

}  // namespace

ItemAttribution attribution_from_json(const std::string& json_text) {
    try {
        json j = json::parse(json_text);
        ItemAttribution a;
        a.item_id = j.at("item_id").get<std::string>();
        a.condition = condition_from_string(j.at("condition").get<std::string>());
        a.answer_flipped = j.at("answer_flipped").get<bool>();
        a.answer_similarity = j.at("answer_similarity").get<double>();
        a.step_disrupted = j.at("step_disrupted").get<bool>();
        a.hallucinated = j.at("hallucinated").get<bool>();
        a.region_attribution =
            region_attribution_from_string(j.at("region_attribution").get<std::string>());
        for (const auto& p : j.at("alignment").at("pairs")) {
            a.alignment.pairs.push_back({p.at("baseline").get<size_t>(),
                                         p.at("masked").get<size_t>(),
                                         p.at("similarity").get<double>()});
        }
        for (const auto& s : j.at("alignment").at("baseline_statuses"))
            a.alignment.baseline_statuses.push_back(
                step_status_from_string(s.get<std::string>()));
        for (const auto& s : j.at("alignment").at("masked_statuses"))
            a.alignment.masked_statuses.push_back(
                step_status_from_string(s.get<std::string>()));
        a.refusal = j.at("refusal").get<bool>();
        a.baseline_refusal = j.at("baseline_refusal").get<bool>();
        a.gt_step_similarity = j.at("gt_step_similarity").get<double>();
        a.backend_id = j.at("backend").get<std::string>();
        a.notes = j.at("notes").get<std::vector<std::string>>();
        return a;
    } catch (const json::exception& e) {
        throw Error("store-corrupt", std::string("bad attribution record: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// RunStore
// ---------------------------------------------------------------------------

RunStore::RunStore(fs::path root, std::string run_id)
    : root_(std::move(root)),
      run_id_(std::move(run_id)),
      commit_mutex_(std::make_unique<std::mutex>()) {}

fs::path RunStore::run_dir() const { return root_ / run_id_; }

fs::path RunStore::item_dir(const std::string& item_id, Condition condition) const {
    return run_dir() / "items" / item_id / to_string(condition);
}

bool RunStore::exists(const fs::path& root, const std::string& run_id) {
    return fs::exists(root / run_id / "manifest.json");
}

RunStore RunStore::init_run(const fs::path& root, const std::string& run_id,
                            const std::vector<DatasetItem>& items,
                            const std::vector<Condition>& conditions,
                            const std::string& config_json) {
    if (exists(root, run_id))
        throw Error("run-exists", "run '" + run_id + "' already exists under " + root.string());
    std::error_code ec;
    fs::create_directories(root / run_id / "items", ec);
    fs::create_directories(root / "cache", ec);
    if (!fs::exists(root / run_id))
        throw Error("out-dir-unwritable", root.string());

    RunStore store(root, run_id);
    store.manifest_.run_id = run_id;
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    store.manifest_.created_at = stamp;
    store.manifest_.config_json = config_json;

    std::string dataset_blob;
    for (const auto& item : items) dataset_blob += item_to_json_line(item) + "\n";
    store.manifest_.dataset_hash = sha256_hex(dataset_blob);
    write_file_atomic(store.run_dir() / "dataset.jsonl", dataset_blob);

    for (const auto& item : items) {
        for (Condition c : conditions) {
            store.manifest_.status[{item.id, c, GenerationStage::CoT}] = WorkStatus::Pending;
            store.manifest_.status[{item.id, c, GenerationStage::Answer}] = WorkStatus::Pending;
        }
    }
    store.commit_manifest();
    return store;
}

RunStore RunStore::open(const fs::path& root, const std::string& run_id) {
    RunStore store(root, run_id);
    fs::path manifest_path = store.run_dir() / "manifest.json";
    std::string content;
    try {
        content = read_file(manifest_path);
    } catch (const Error&) {
        throw Error("manifest-corrupt", "missing manifest for run '" + run_id + "'");
    }
    try {
        json j = json::parse(content);
        store.manifest_.run_id = j.at("run_id").get<std::string>();
        store.manifest_.created_at = j.at("created_at").get<std::string>();
        store.manifest_.dataset_hash = j.at("dataset_hash").get<std::string>();
        store.manifest_.config_json = j.at("config").dump();
        for (const auto& [key, value] : j.at("status").items()) {
            store.manifest_.status[StageKey::parse(key)] =
                work_status_from_string(value.get<std::string>());
        }
    } catch (const json::exception& e) {
        throw Error("manifest-corrupt", std::string(e.what()));
    }
    return store;
}

void RunStore::commit_manifest() {
    json status = json::object();
    for (const auto& [key, value] : manifest_.status) status[key.str()] = to_string(value);
    json j = {{"format_version", 1},
              {"run_id", manifest_.run_id},
              {"created_at", manifest_.created_at},
              {"dataset_hash", manifest_.dataset_hash},
              {"config", json::parse(manifest_.config_json)},
              {"status", status}};
    write_file_atomic(run_dir() / "manifest.json", j.dump(2) + "\n");
}

void RunStore::add_condition(Condition condition) {
    std::lock_guard<std::mutex> lock(*commit_mutex_);
    bool added = false;
    for (const auto& item : dataset()) {
        for (GenerationStage stage : {GenerationStage::CoT, GenerationStage::Answer}) {
            StageKey key{item.id, condition, stage};
            if (manifest_.status.emplace(key, WorkStatus::Pending).second) added = true;
        }
    }
    if (added) commit_manifest();
}

std::vector<StageKey> RunStore::resume(const std::string& config_json) {
    std::lock_guard<std::mutex> lock(*commit_mutex_);
    if (json::parse(manifest_.config_json) != json::parse(config_json))
        throw Error("config-mismatch",
                    "run '" + run_id_ + "' was created with a different config");
    std::vector<StageKey> work;
    bool changed = false;
    for (auto& [key, status] : manifest_.status) {
        if (status == WorkStatus::Failed) {
            status = WorkStatus::Pending;
            changed = true;
        }
        if (status == WorkStatus::Pending) work.push_back(key);
    }
    if (changed) commit_manifest();
    return work;
}

std::vector<StageKey> RunStore::pending_work(Condition condition) const {
    std::vector<StageKey> work;
    for (const auto& [key, status] : manifest_.status) {
        if (key.condition == condition && status != WorkStatus::Done) work.push_back(key);
    }
    return work;
}

void RunStore::mark_done(const StageKey& key) {
    std::lock_guard<std::mutex> lock(*commit_mutex_);
    manifest_.status[key] = WorkStatus::Done;
    commit_manifest();
}

void RunStore::mark_failed(const StageKey& key, const std::string& message) {
    std::lock_guard<std::mutex> lock(*commit_mutex_);
    manifest_.status[key] = WorkStatus::Failed;
    commit_manifest();
    fs::path dir = item_dir(key.item_id, key.condition);
    std::error_code ec;
    fs::create_directories(dir, ec);
    json j = {{"stage", to_string(key.stage)}, {"error", message}};
    write_file_atomic(dir / ("error_" + to_string(key.stage) + ".json"), j.dump(2) + "\n");
}

std::vector<DatasetItem> RunStore::dataset() const {
    return load_dataset(run_dir() / "dataset.jsonl");
}

std::vector<Condition> RunStore::conditions() const {
    std::set<Condition> seen;
    for (const auto& [key, status] : manifest_.status) seen.insert(key.condition);
    return {seen.begin(), seen.end()};
}

void RunStore::write_generation(const GenerationRecord& record) {
    fs::path dir = item_dir(record.item_id, record.condition);
    std::error_code ec;
    fs::create_directories(dir, ec);
    write_file_atomic(dir / (to_string(record.stage) + ".json"),
                      generation_record_to_json(record));
}

std::optional<GenerationRecord> RunStore::read_generation(const std::string& item_id,
                                                          Condition condition,
                                                          GenerationStage stage) const {
    fs::path path = item_dir(item_id, condition) / (to_string(stage) + ".json");
    if (!fs::exists(path)) return std::nullopt;
    return generation_record_from_json(read_file(path));
}

void RunStore::write_masked_image(const std::string& item_id, Condition condition,
                                  const Image& image, std::optional<uint64_t> seed) {
    fs::path dir = item_dir(item_id, condition);
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::string name = "masked_" + to_string(condition);
    if (seed) name += "_seed" + std::to_string(*seed);
    name += ".ppm";
    auto bytes = encode_ppm(image);
    write_file_atomic(dir / name, std::string(bytes.begin(), bytes.end()));
}

void RunStore::write_attribution(const ItemAttribution& attribution) {
    fs::path dir = item_dir(attribution.item_id, attribution.condition);
    std::error_code ec;
    fs::create_directories(dir, ec);
    write_file_atomic(dir / "attribution.json", attribution_to_json(attribution));
}

std::optional<ItemAttribution> RunStore::read_attribution(const std::string& item_id,
                                                          Condition condition) const {
    fs::path path = item_dir(item_id, condition) / "attribution.json";
    if (!fs::exists(path)) return std::nullopt;
    return attribution_from_json(read_file(path));
}

std::optional<GenerationRecord> RunStore::cache_lookup(const CacheKey& key) const {
    fs::path path = root_ / "cache" / (key.id() + ".json");
    if (!fs::exists(path)) return std::nullopt;
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw Error("store-corrupt", "cache entry unreadable: " + std::string(e.what()));
    }
    std::string record_json = j.at("record").dump();
    std::string checksum = j.value("checksum", "");
    if (sha256_hex(record_json) != checksum)
        throw Error("store-corrupt", "cache checksum mismatch for " + path.string());
    return generation_record_from_json(record_json);
}

void RunStore::cache_put(const CacheKey& key, const GenerationRecord& record) {
    std::error_code ec;
    fs::create_directories(root_ / "cache", ec);
    json record_json = json::parse(generation_record_to_json(record));
    std::string record_dump = record_json.dump();
    json j = {{"format_version", 1},
              {"key", json::parse(key.canonical())},
              {"record", record_json},
              {"checksum", sha256_hex(record_dump)}};
    write_file_atomic(root_ / "cache" / (key.id() + ".json"), j.dump(2) + "\n");
}

}  // namespace crm
