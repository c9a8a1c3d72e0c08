#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crm/geometry.hpp"

namespace crm {

// One annotated image/question pair. important_regions drive specific
// masking; gt_step_hint links the annotation to the reasoning step expected
// to depend on it.
struct DatasetItem {
    std::string id;
    std::string image_ref;
    std::string question;
    std::vector<BoundingBox> important_regions;
    std::vector<BoundingBox> irrelevant_regions;
    std::optional<std::string> gt_step_hint;
    std::optional<std::string> topic;
    std::optional<std::string> difficulty;

    bool operator==(const DatasetItem&) const = default;
};

struct Finding {
    std::string code;
    std::string message;
};

struct ValidationReport {
    std::string item_id;
    std::vector<Finding> errors;
    std::vector<Finding> warnings;

    bool ok() const { return errors.empty(); }
};

// Line-delimited records; every malformed line is an error, nothing is
// skipped silently. Throws file-not-found / malformed-record / duplicate-id.
std::vector<DatasetItem> load_dataset(const std::filesystem::path& path);

void save_dataset(const std::vector<DatasetItem>& items,
                  const std::filesystem::path& path);

std::string item_to_json_line(const DatasetItem& item);
DatasetItem item_from_json_line(const std::string& line);

// Pure structural checks against the decoded image dimensions.
ValidationReport validate_item(const DatasetItem& item, ImageDims image_dims);

// Deterministic stratified subsample: groups by (topic, difficulty) with an
// "unlabeled" bucket, takes min(per_stratum, |group|) uniformly at random.
// Output is stratum-major (strata sorted lexicographically), stable within a
// stratum.
std::vector<DatasetItem> sample_balanced(const std::vector<DatasetItem>& items,
                                         uint64_t seed, size_t per_stratum);

}  // namespace crm
