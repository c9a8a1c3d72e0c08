#pragma once

#include <cstdint>
#include <optional>

namespace crm {

// Axis-aligned pixel rectangle, origin top-left. Negative x/y are legal in
// annotations and handled by clamping.
struct BoundingBox {
    int64_t x = 0;
    int64_t y = 0;
    int64_t w = 0;
    int64_t h = 0;

    bool operator==(const BoundingBox&) const = default;

    int64_t right() const { return x + w; }
    int64_t bottom() const { return y + h; }
    int64_t area() const { return w * h; }
};

struct ImageDims {
    int64_t width = 0;
    int64_t height = 0;
};

// Intersect with [0,w)x[0,h); nullopt when nothing with positive area remains.
std::optional<BoundingBox> clamp_box(const BoundingBox& box, ImageDims dims);

bool boxes_intersect(const BoundingBox& a, const BoundingBox& b);

// Minimum Euclidean distance between box boundaries; 0 when touching or
// overlapping.
double box_gap(const BoundingBox& a, const BoundingBox& b);

double image_diagonal(ImageDims dims);

}  // namespace crm
