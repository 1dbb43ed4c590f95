#include "naop/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "naop/error.hpp"

namespace naop {

bool PixelBox::valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) && x1 < x2 && y1 < y2;
}

NormBox normalize_box(const PixelBox& box, double frame_width, double frame_height) {
    if (!(frame_width > 0) || !(frame_height > 0))
        fail(ErrorCode::InvalidArgument, "frame dimensions must be positive");
    return {box.x1 / frame_width - 0.5, box.y1 / frame_height - 0.5, box.x2 / frame_width - 0.5,
            box.y2 / frame_height - 0.5};
}

PixelBox denormalize_box(const NormBox& box, double frame_width, double frame_height) {
    if (!(frame_width > 0) || !(frame_height > 0))
        fail(ErrorCode::InvalidArgument, "frame dimensions must be positive");
    return {(box.x1 + 0.5) * frame_width, (box.y1 + 0.5) * frame_height, (box.x2 + 0.5) * frame_width,
            (box.y2 + 0.5) * frame_height};
}

double iou(const PixelBox& a, const PixelBox& b) {
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (iw <= 0 || ih <= 0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return uni > 0 ? inter / uni : 0.0;
}

}  // namespace naop
