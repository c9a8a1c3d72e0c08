#include "crm/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace crm {

std::optional<BoundingBox> clamp_box(const BoundingBox& box, ImageDims dims) {
    int64_t x0 = std::max<int64_t>(box.x, 0);
    int64_t y0 = std::max<int64_t>(box.y, 0);
    int64_t x1 = std::min(box.right(), dims.width);
    int64_t y1 = std::min(box.bottom(), dims.height);
    if (x1 <= x0 || y1 <= y0) return std::nullopt;
    return BoundingBox{x0, y0, x1 - x0, y1 - y0};
}

bool boxes_intersect(const BoundingBox& a, const BoundingBox& b) {
    return a.x < b.right() && b.x < a.right() && a.y < b.bottom() && b.y < a.bottom();
}

double box_gap(const BoundingBox& a, const BoundingBox& b) {
    int64_t dx = std::max<int64_t>({int64_t{0}, b.x - a.right(), a.x - b.right()});
    int64_t dy = std::max<int64_t>({int64_t{0}, b.y - a.bottom(), a.y - b.bottom()});
    return std::hypot(static_cast<double>(dx), static_cast<double>(dy));
}

double image_diagonal(ImageDims dims) {
    return std::hypot(static_cast<double>(dims.width), static_cast<double>(dims.height));
}

}  // namespace crm
