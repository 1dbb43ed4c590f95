#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "naop/geometry.hpp"
#include "naop/trajectories.hpp"

namespace naop {

enum class DescriptorVariant { Full = 0, Relative = 1, Absolute = 2, AbsoluteDiff = 3, AbsoluteScale = 4 };

inline constexpr DescriptorVariant kAllVariants[] = {
    DescriptorVariant::Full, DescriptorVariant::Relative, DescriptorVariant::Absolute,
    DescriptorVariant::AbsoluteDiff, DescriptorVariant::AbsoluteScale};

const char* to_string(DescriptorVariant variant);
std::optional<DescriptorVariant> parse_variant(std::string_view name);

/// Descriptor length for a trajectory of h boxes.
std::size_t descriptor_dimension(DescriptorVariant variant, std::size_t h);

struct FeatureVector {
    std::vector<double> values;
    DescriptorVariant variant = DescriptorVariant::Full;
    std::size_t h = 0;
};

/// Full layout: (xc_1, yc_1, ..., xc_h, yc_h, s_1..s_h, dxc_2, dyc_2, ..., dxc_h, dyc_h, ds_2..ds_h).
FeatureVector describe(std::span<const NormBox> boxes, DescriptorVariant variant);
inline FeatureVector describe(const Trajectory& t, DescriptorVariant variant) { return describe(t.boxes, variant); }

/// Sum of center displacement magnitudes.
double motion_magnitude(std::span<const NormBox> boxes);
inline double motion_magnitude(const Trajectory& t) { return motion_magnitude(t.boxes); }

}  // namespace naop
