#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace crm::fixtures {

// Flavor of the canned masked-side outputs.
//   Normal:    authored traces exercising flips, disruption, hallucination,
//              refusal, and garbage insertions (random masking leaves the
//              reasoning intact for contrast).
//   Identity:  masked outputs byte-equal the baseline outputs.
//   Scrambled: masked outputs share no vocabulary with the baseline.
enum class Mode { Normal, Identity, Scrambled };

Mode mode_from_string(const std::string& s);

struct Bundle {
    std::filesystem::path dataset_path;
    std::filesystem::path images_dir;
    std::filesystem::path fixtures_path;
    size_t item_count = 0;
};

// Writes the bundled 6-item demo corpus: dataset.jsonl, synthetic images,
// and a mock-provider fixture file keyed by the exact (image_hash,
// prompt_hash) pairs the pipeline will request. Deterministic for a given
// (mode, mask_seed).
Bundle generate_bundle(const std::filesystem::path& out_dir, Mode mode,
                       uint64_t mask_seed);

}  // namespace crm::fixtures
