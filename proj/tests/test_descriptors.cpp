#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "naop/descriptors.hpp"
#include "naop/error.hpp"

using namespace naop;

namespace {

// Box with a given center and area (square).
NormBox box_at(double xc, double yc, double s) {
    const double half = 0.5 * std::sqrt(s);
    return {xc - half, yc - half, xc + half, yc + half};
}

std::vector<NormBox> random_boxes(std::mt19937_64& rng, std::size_t h) {
    std::uniform_real_distribution<double> c(-0.3, 0.3), s(0.001, 0.04);
    std::vector<NormBox> out;
    for (std::size_t i = 0; i < h; ++i) out.push_back(box_at(c(rng), c(rng), s(rng)));
    return out;
}

std::size_t formula(DescriptorVariant v, std::size_t h) {
    switch (v) {
        case DescriptorVariant::Full: return 6 * h - 3;
        case DescriptorVariant::Relative: return 2 * (h - 1);
        case DescriptorVariant::Absolute: return 2 * h;
        case DescriptorVariant::AbsoluteDiff: return 4 * h - 2;
        case DescriptorVariant::AbsoluteScale: return 3 * h;
    }
    return 0;
}

}  // namespace

TEST_CASE("Full descriptor of the two-box example") {
    const std::vector<NormBox> t{box_at(0, 0, 0.25), box_at(0.1, 0, 0.25)};
    const auto f = describe(t, DescriptorVariant::Full);
    const std::vector<double> expect{0, 0, 0.1, 0, 0.25, 0.25, 0.1, 0, 0};
    REQUIRE(f.values.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(f.values[i] - expect[i]) <= 1e-12);
    CHECK(f.h == 2);
    CHECK(f.variant == DescriptorVariant::Full);

    const auto r = describe(t, DescriptorVariant::Relative);
    REQUIRE(r.values.size() == 2);
    CHECK(r.values[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(r.values[1]) <= 1e-12);
}

TEST_CASE("descriptor dimensions for h = 30") {
    std::mt19937_64 rng(1);
    const auto b = random_boxes(rng, 30);
    CHECK(describe(b, DescriptorVariant::Full).values.size() == 177);
    CHECK(describe(b, DescriptorVariant::AbsoluteScale).values.size() == 90);
    CHECK(describe(b, DescriptorVariant::AbsoluteDiff).values.size() == 118);
    CHECK(describe(b, DescriptorVariant::Relative).values.size() == 58);
}

TEST_CASE("descriptor dimension property for h in [2, 120]") {
    std::mt19937_64 rng(2);
    for (std::size_t h = 2; h <= 120; ++h) {
        const auto b = random_boxes(rng, h);
        for (auto v : kAllVariants) {
            const auto f = describe(b, v);
            CHECK(f.values.size() == formula(v, h));
            CHECK(descriptor_dimension(v, h) == formula(v, h));
            for (double x : f.values) CHECK(std::isfinite(x));
        }
    }
}

TEST_CASE("descriptor blocks follow the documented layout") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t h = 2 + rng() % 20;
        const auto b = random_boxes(rng, h);
        const auto full = describe(b, DescriptorVariant::Full).values;
        const auto absolute = describe(b, DescriptorVariant::Absolute).values;
        const auto diff = describe(b, DescriptorVariant::AbsoluteDiff).values;
        const auto scale = describe(b, DescriptorVariant::AbsoluteScale).values;
        for (std::size_t j = 0; j < h; ++j) {
            CHECK(full[2 * j] == b[j].xc());
            CHECK(full[2 * j + 1] == b[j].yc());
            CHECK(full[2 * h + j] == b[j].area());
            CHECK(absolute[2 * j] == b[j].xc());
            CHECK(scale[2 * h + j] == b[j].area());
        }
        for (std::size_t j = 1; j < h; ++j) {
            const double dx = b[j].xc() - b[j - 1].xc(), dy = b[j].yc() - b[j - 1].yc();
            CHECK(full[3 * h + 2 * (j - 1)] == dx);
            CHECK(full[3 * h + 2 * (j - 1) + 1] == dy);
            CHECK(full[5 * h - 2 + (j - 1)] == b[j].area() - b[j - 1].area());
            CHECK(diff[2 * h + 2 * (j - 1)] == dx);
            CHECK(diff[2 * h + 2 * (j - 1) + 1] == dy);
        }
    }
}

TEST_CASE("describe rejects single-box input") {
    const std::vector<NormBox> one{box_at(0, 0, 0.01)};
    CHECK_THROWS_AS(describe(one, DescriptorVariant::Full), Error);
    CHECK(parse_variant("absolute-scale") == DescriptorVariant::AbsoluteScale);
    CHECK_FALSE(parse_variant("bogus").has_value());
    for (auto v : kAllVariants) CHECK(parse_variant(to_string(v)) == v);
}

TEST_CASE("Relative descriptor: translation invariant, unit total magnitude, zeros when static") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> shift(-0.1, 0.1);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t h = 2 + rng() % 40;
        auto b = random_boxes(rng, h);
        const auto r = describe(b, DescriptorVariant::Relative).values;
        double total = 0;
        for (std::size_t j = 0; j + 1 < r.size(); j += 2) total += std::hypot(r[j], r[j + 1]);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

        const double dx = shift(rng), dy = shift(rng);
        for (auto& x : b) x = {x.x1 + dx, x.y1 + dy, x.x2 + dx, x.y2 + dy};
        const auto moved = describe(b, DescriptorVariant::Relative).values;
        for (std::size_t j = 0; j < r.size(); ++j) CHECK(moved[j] == doctest::Approx(r[j]).epsilon(1e-9));
    }
    const std::vector<NormBox> still(6, box_at(0.1, 0.1, 0.01));
    for (double v : describe(still, DescriptorVariant::Relative).values) CHECK(v == 0.0);
}

TEST_CASE("Full descriptor of a translated trajectory changes only the position block") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> shift(-0.1, 0.1);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t h = 2 + rng() % 40;
        auto b = random_boxes(rng, h);
        const auto f = describe(b, DescriptorVariant::Full).values;
        const double dx = shift(rng), dy = shift(rng);
        for (auto& x : b) x = {x.x1 + dx, x.y1 + dy, x.x2 + dx, x.y2 + dy};
        const auto g = describe(b, DescriptorVariant::Full).values;
        for (std::size_t j = 0; j < 2 * h; ++j)
            CHECK(g[j] - f[j] == doctest::Approx(j % 2 == 0 ? dx : dy).epsilon(1e-9));
        for (std::size_t j = 2 * h; j < f.size(); ++j) CHECK(std::abs(g[j] - f[j]) <= 1e-12);
    }
}

TEST_CASE("motion_magnitude examples") {
    CHECK(motion_magnitude(std::vector<NormBox>(10, box_at(0.1, -0.2, 0.01))) == 0.0);
    const std::vector<NormBox> two{box_at(0, 0, 0.01), box_at(0.3, 0.4, 0.01)};
    CHECK(motion_magnitude(two) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("motion_magnitude matches step accumulation and is translation and reversal invariant") {
    std::mt19937_64 rng(6);
    for (int rep = 0; rep < 300; ++rep) {
        auto b = random_boxes(rng, 2 + rng() % 30);
        double acc = 0;
        for (std::size_t j = 1; j < b.size(); ++j) {
            const double cx0 = (b[j - 1].x1 + b[j - 1].x2) / 2, cy0 = (b[j - 1].y1 + b[j - 1].y2) / 2;
            const double cx1 = (b[j].x1 + b[j].x2) / 2, cy1 = (b[j].y1 + b[j].y2) / 2;
            acc += std::sqrt((cx1 - cx0) * (cx1 - cx0) + (cy1 - cy0) * (cy1 - cy0));
        }
        const double m = motion_magnitude(b);
        CHECK(m == doctest::Approx(acc).epsilon(1e-12));
        std::reverse(b.begin(), b.end());
        CHECK(motion_magnitude(b) == doctest::Approx(m).epsilon(1e-12));
        for (auto& x : b) x = {x.x1 + 0.05, x.y1 - 0.03, x.x2 + 0.05, x.y2 - 0.03};
        CHECK(motion_magnitude(b) == doctest::Approx(m).epsilon(1e-9));
    }
}
