#include "crm/masking.hpp"

#include <random>

#include "crm/error.hpp"
#include "crm/sha256.hpp"

namespace crm {

std::string to_string(MaskCondition c) {
    return c == MaskCondition::Specific ? "specific" : "random";
}

namespace {

std::vector<BoundingBox> clamp_all(const std::vector<BoundingBox>& boxes,
                                   ImageDims dims) {
    std::vector<BoundingBox> out;
    out.reserve(boxes.size());
    for (size_t i = 0; i < boxes.size(); ++i) {
        auto clamped = clamp_box(boxes[i], dims);
        if (!clamped)
            throw Error("zero-area-after-clamp",
                        "box " + std::to_string(i) + " has no area inside the image");
        out.push_back(*clamped);
    }
    return out;
}

uint64_t bounded_draw(std::mt19937_64& rng, uint64_t span) {
    // span >= 1; rejection keeps the draw unbiased and bit-portable.
    uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % span;
}

}  // namespace

MaskedImage mask_specific(const Image& image, const std::vector<BoundingBox>& boxes) {
    if (image.width <= 0 || image.height <= 0)
        throw Error("undecodable-image", "empty raster");
    auto clamped = clamp_all(boxes, image.dims());
    MaskedImage out;
    out.source_hash = sha256_hex(encode_ppm(image));
    out.image = image;
    for (const auto& box : clamped) out.image.fill_rect(box, 0, 0, 0);
    out.spec = MaskSpec{clamped, MaskCondition::Specific, std::nullopt};
    return out;
}

std::vector<BoundingBox> sample_random_boxes(ImageDims dims,
                                             const std::vector<BoundingBox>& gt_boxes,
                                             size_t count, uint64_t seed,
                                             size_t max_attempts) {
    if (gt_boxes.empty()) throw Error("empty-gt", "no ground-truth boxes to avoid");
    if (count < 1) throw Error("invalid-argument", "count must be >= 1");
    auto gt = clamp_all(gt_boxes, dims);
    const double min_gap = kRandomMaskGapFraction * image_diagonal(dims);

    std::mt19937_64 rng(seed);
    std::vector<BoundingBox> out;
    out.reserve(count);
    for (size_t k = 0; k < count; ++k) {
        const BoundingBox& proto = gt[k % gt.size()];
        int64_t max_x = dims.width - proto.w;
        int64_t max_y = dims.height - proto.h;
        if (max_x < 0 || max_y < 0)
            throw Error("infeasible-placement",
                        "box " + std::to_string(k) + " does not fit in the image");
        bool placed = false;
        for (size_t attempt = 0; attempt < max_attempts; ++attempt) {
            BoundingBox cand{static_cast<int64_t>(bounded_draw(rng, static_cast<uint64_t>(max_x) + 1)),
                             static_cast<int64_t>(bounded_draw(rng, static_cast<uint64_t>(max_y) + 1)),
                             proto.w, proto.h};
            bool ok = true;
            for (const auto& g : gt) {
                if (boxes_intersect(cand, g) || box_gap(cand, g) < min_gap) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                out.push_back(cand);
                placed = true;
                break;
            }
        }
        if (!placed)
            throw Error("infeasible-placement",
                        "box " + std::to_string(k) + ": no valid placement in " +
                            std::to_string(max_attempts) + " proposals (gap >= " +
                            std::to_string(min_gap) + "px)");
    }
    return out;
}

MaskedImage mask_random(const Image& image, const std::vector<BoundingBox>& gt_boxes,
                        uint64_t seed) {
    auto boxes = sample_random_boxes(image.dims(), gt_boxes, gt_boxes.size(), seed);
    MaskedImage out = mask_specific(image, boxes);
    out.spec.condition = MaskCondition::Random;
    out.spec.seed = seed;
    return out;
}

}  // namespace crm
