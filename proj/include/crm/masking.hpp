#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crm/geometry.hpp"
#include "crm/image.hpp"

namespace crm {

enum class MaskCondition { Specific, Random };

std::string to_string(MaskCondition c);

// Which rectangles were blacked out and why. Random specs record the seed
// that produced them.
struct MaskSpec {
    std::vector<BoundingBox> boxes;  // clamped
    MaskCondition condition = MaskCondition::Specific;
    std::optional<uint64_t> seed;
};

struct MaskedImage {
    Image image;
    std::string source_hash;  // sha256 of the original encoded bytes
    MaskSpec spec;
};

// Paints every pixel inside the clamped boxes opaque black and leaves every
// other pixel bit-identical. Throws zero-area-after-clamp per offending box.
MaskedImage mask_specific(const Image& image, const std::vector<BoundingBox>& boxes);

// Rejection-sampled control placements: box k reuses the dimensions of
// gt_boxes[k mod n], lies fully in bounds, intersects no gt box, and keeps a
// boundary gap of at least 5% of the image diagonal from every gt box.
// Deterministic under seed; throws infeasible-placement once a box exhausts
// max_attempts proposals.
std::vector<BoundingBox> sample_random_boxes(ImageDims dims,
                                             const std::vector<BoundingBox>& gt_boxes,
                                             size_t count, uint64_t seed,
                                             size_t max_attempts = 10000);

MaskedImage mask_random(const Image& image, const std::vector<BoundingBox>& gt_boxes,
                        uint64_t seed);

// Fraction of the diagonal a control box must keep clear of every gt box.
inline constexpr double kRandomMaskGapFraction = 0.05;

}  // namespace crm
