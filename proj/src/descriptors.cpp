#include "naop/descriptors.hpp"

#include <algorithm>
#include <cmath>

#include "naop/error.hpp"

namespace naop {

const char* to_string(DescriptorVariant variant) {
    switch (variant) {
        case DescriptorVariant::Full: return "full";
        case DescriptorVariant::Relative: return "relative";
        case DescriptorVariant::Absolute: return "absolute";
        case DescriptorVariant::AbsoluteDiff: return "absolute-diff";
        case DescriptorVariant::AbsoluteScale: return "absolute-scale";
    }
    return "?";
}

std::optional<DescriptorVariant> parse_variant(std::string_view name) {
    for (auto v : kAllVariants)
        if (name == to_string(v)) return v;
    return std::nullopt;
}

std::size_t descriptor_dimension(DescriptorVariant variant, std::size_t h) {
    switch (variant) {
        case DescriptorVariant::Full: return 6 * h - 3;
        case DescriptorVariant::Relative: return 2 * (h - 1);
        case DescriptorVariant::Absolute: return 2 * h;
        case DescriptorVariant::AbsoluteDiff: return 4 * h - 2;
        case DescriptorVariant::AbsoluteScale: return 3 * h;
    }
    return 0;
}

FeatureVector describe(std::span<const NormBox> boxes, DescriptorVariant variant) {
    const std::size_t h = boxes.size();
    if (h < 2) fail(ErrorCode::InvalidArgument, "descriptor needs at least 2 boxes");

    FeatureVector fv;
    fv.variant = variant;
    fv.h = h;
    auto& v = fv.values;
    v.reserve(descriptor_dimension(variant, h));

    auto centers = [&] {
        for (const auto& b : boxes) {
            v.push_back(b.xc());
            v.push_back(b.yc());
        }
    };
    auto scales = [&] {
        for (const auto& b : boxes) v.push_back(b.area());
    };
    auto center_diffs = [&] {
        for (std::size_t j = 1; j < h; ++j) {
            v.push_back(boxes[j].xc() - boxes[j - 1].xc());
            v.push_back(boxes[j].yc() - boxes[j - 1].yc());
        }
    };
    auto scale_diffs = [&] {
        for (std::size_t j = 1; j < h; ++j) v.push_back(boxes[j].area() - boxes[j - 1].area());
    };

    switch (variant) {
        case DescriptorVariant::Full:
            centers();
            scales();
            center_diffs();
            scale_diffs();
            break;
        case DescriptorVariant::Relative: {
            center_diffs();
            const double total = motion_magnitude(boxes);
            if (total > 0) {
                for (auto& x : v) x /= total;
            } else {
                std::fill(v.begin(), v.end(), 0.0);
            }
            break;
        }
        case DescriptorVariant::Absolute:
            centers();
            break;
        case DescriptorVariant::AbsoluteDiff:
            centers();
            center_diffs();
            break;
        case DescriptorVariant::AbsoluteScale:
            centers();
            scales();
            break;
    }
    for (double x : v)
        if (!std::isfinite(x)) fail(ErrorCode::InvalidArgument, "non-finite descriptor value");
    return fv;
}

double motion_magnitude(std::span<const NormBox> boxes) {
    double m = 0.0;
    for (std::size_t j = 1; j < boxes.size(); ++j)
        m += std::hypot(boxes[j].xc() - boxes[j - 1].xc(), boxes[j].yc() - boxes[j - 1].yc());
    return m;
}

}  // namespace naop
