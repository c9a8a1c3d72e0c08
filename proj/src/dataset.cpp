#include "crm/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <unordered_set>

#include <json.hpp>

#include "crm/error.hpp"
#include "crm/text.hpp"

namespace crm {

using nlohmann::json;

namespace {

json box_to_json(const BoundingBox& b) {
    return json{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}};
}

BoundingBox box_from_json(const json& j) {
    BoundingBox b;
    b.x = j.at("x").get<int64_t>();
    b.y = j.at("y").get<int64_t>();
    b.w = j.at("w").get<int64_t>();
    b.h = j.at("h").get<int64_t>();
    if (b.w <= 0 || b.h <= 0)
        throw Error("malformed-record", "box requires positive w and h");
    return b;
}

std::vector<BoundingBox> boxes_from_json(const json& j) {
    std::vector<BoundingBox> out;
    for (const auto& e : j) out.push_back(box_from_json(e));
    return out;
}

}  // namespace

std::string item_to_json_line(const DatasetItem& item) {
    json j;
    j["id"] = item.id;
    j["image"] = item.image_ref;
    j["question"] = item.question;
    j["important_regions"] = json::array();
    for (const auto& b : item.important_regions) j["important_regions"].push_back(box_to_json(b));
    j["irrelevant_regions"] = json::array();
    for (const auto& b : item.irrelevant_regions) j["irrelevant_regions"].push_back(box_to_json(b));
    if (item.gt_step_hint) j["gt_step_hint"] = *item.gt_step_hint;
    if (item.topic) j["topic"] = *item.topic;
    if (item.difficulty) j["difficulty"] = *item.difficulty;
    return j.dump();
}

DatasetItem item_from_json_line(const std::string& line) {
    json j = json::parse(line);
    DatasetItem item;
    item.id = j.at("id").get<std::string>();
    item.image_ref = j.at("image").get<std::string>();
    item.question = j.at("question").get<std::string>();
    item.important_regions = boxes_from_json(j.at("important_regions"));
    if (j.contains("irrelevant_regions"))
        item.irrelevant_regions = boxes_from_json(j["irrelevant_regions"]);
    if (j.contains("gt_step_hint")) item.gt_step_hint = j["gt_step_hint"].get<std::string>();
    if (j.contains("topic")) item.topic = j["topic"].get<std::string>();
    if (j.contains("difficulty")) item.difficulty = j["difficulty"].get<std::string>();
    return item;
}

std::vector<DatasetItem> load_dataset(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error("file-not-found", path.string());
    std::vector<DatasetItem> items;
    std::unordered_set<std::string> seen;
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        DatasetItem item;
        try {
            item = item_from_json_line(line);
        } catch (const Error& e) {
            throw Error("malformed-record",
                        "record " + std::to_string(lineno) + ": " + e.what());
        } catch (const std::exception& e) {
            throw Error("malformed-record",
                        "record " + std::to_string(lineno) + ": " + e.what());
        }
        if (!seen.insert(item.id).second)
            throw Error("duplicate-id", "id '" + item.id + "' appears more than once");
        items.push_back(std::move(item));
    }
    return items;
}

void save_dataset(const std::vector<DatasetItem>& items,
                  const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw Error("out-dir-unwritable", "cannot write " + path.string());
    for (const auto& item : items) f << item_to_json_line(item) << "\n";
}

ValidationReport validate_item(const DatasetItem& item, ImageDims image_dims) {
    ValidationReport report;
    report.item_id = item.id;
    if (text::trim(item.question).empty())
        report.errors.push_back({"empty-question", "question text is empty"});
    if (item.important_regions.empty())
        report.errors.push_back({"empty-important-regions",
                                 "item has no maskable region"});
    double image_area =
        static_cast<double>(image_dims.width) * static_cast<double>(image_dims.height);
    auto check_box = [&](const BoundingBox& box, const char* kind, size_t idx) {
        auto clamped = clamp_box(box, image_dims);
        std::string where = std::string(kind) + " box " + std::to_string(idx);
        if (!clamped) {
            report.errors.push_back(
                {"out-of-bounds", where + " clamps to zero area (" +
                                      std::to_string(box.x) + "," + std::to_string(box.y) +
                                      "," + std::to_string(box.w) + "," +
                                      std::to_string(box.h) + ")"});
            return;
        }
        if (image_area > 0 &&
            static_cast<double>(clamped->area()) > 0.9 * image_area) {
            report.warnings.push_back(
                {"full-coverage", where + " covers more than 90% of the image"});
        }
    };
    for (size_t i = 0; i < item.important_regions.size(); ++i)
        check_box(item.important_regions[i], "important", i);
    for (size_t i = 0; i < item.irrelevant_regions.size(); ++i)
        check_box(item.irrelevant_regions[i], "irrelevant", i);
    return report;
}

std::vector<DatasetItem> sample_balanced(const std::vector<DatasetItem>& items,
                                         uint64_t seed, size_t per_stratum) {
    if (per_stratum < 1) throw Error("invalid-argument", "per_stratum must be >= 1");
    // Stratum key -> indexes in input order. std::map keeps strata sorted so
    // the draw order (and therefore the RNG stream) is reproducible.
    std::map<std::pair<std::string, std::string>, std::vector<size_t>> strata;
    for (size_t i = 0; i < items.size(); ++i) {
        strata[{items[i].topic.value_or("unlabeled"),
                items[i].difficulty.value_or("unlabeled")}]
            .push_back(i);
    }
    std::mt19937_64 rng(seed);
    std::vector<DatasetItem> out;
    for (auto& [key, idxs] : strata) {
        size_t take = std::min(per_stratum, idxs.size());
        // Partial Fisher-Yates with a portable bounded draw; std::uniform_int_
        // distribution is not bit-stable across standard libraries.
        for (size_t i = 0; i < take; ++i) {
            uint64_t span = idxs.size() - i;
            uint64_t limit = UINT64_MAX - UINT64_MAX % span;
            uint64_t v;
            do {
                v = rng();
            } while (v >= limit);
            std::swap(idxs[i], idxs[i + static_cast<size_t>(v % span)]);
        }
        idxs.resize(take);
        std::sort(idxs.begin(), idxs.end());
        for (size_t i : idxs) out.push_back(items[i]);
    }
    return out;
}

}  // namespace crm
