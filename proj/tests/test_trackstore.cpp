#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "naop/error.hpp"
#include "naop/log.hpp"
#include "naop/trackstore.hpp"
#include "support.hpp"

using namespace naop;
using naop::test::flags_of;
using naop::test::make_track;

namespace {

const char* kTwoFrames =
    R"({"track_id":"a","subject_id":"s1","video_id":"v1","class":"mug","frame_width":640,"frame_height":480,)"
    R"("frames":[{"f":0,"x1":1,"y1":2,"x2":30,"y2":40,"active":false,"annotated":true},)"
    R"({"f":1,"x1":2,"y1":2,"x2":31,"y2":40,"active":false,"annotated":true}]})";

ErrorCode parse_error_code(const std::string& text) {
    try {
        parse_tracks_string(text);
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Internal;
}

std::string parse_error_text(const std::string& text) {
    try {
        parse_tracks_string(text);
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("parse_tracks reads a two-frame passive track") {
    const auto ds = parse_tracks_string(kTwoFrames);
    REQUIRE(ds.tracks.size() == 1);
    const auto& t = ds.tracks[0];
    CHECK(t.track_id == "a");
    CHECK(t.object_class == "mug");
    CHECK(t.frames.size() == 2);
    CHECK(t.frames[1].box == PixelBox{2, 2, 31, 40});
    CHECK(classify_track(t) == TrackKind::Passive);
}

TEST_CASE("parse_tracks on an empty stream gives an empty dataset") {
    CHECK(parse_tracks_string("").tracks.empty());
    CHECK(parse_tracks_string("\n\n").tracks.empty());
}

TEST_CASE("parse_tracks rejects invalid input with line numbers") {
    std::string bad = kTwoFrames;
    bad.replace(bad.find("\"x1\":1,"), 7, "\"x1\":99,");
    const std::string text = std::string(kTwoFrames) + "\n" + std::string(bad).replace(bad.find("\"a\""), 3, "\"b\"");
    CHECK(parse_error_text(text).find("line 2") != std::string::npos);

    const std::string dup = std::string(kTwoFrames) + "\n" + kTwoFrames;
    CHECK(parse_error_text(dup).find("line 2") != std::string::npos);
    CHECK(parse_error_text(dup).find("duplicate") != std::string::npos);

    std::string unsorted = kTwoFrames;
    unsorted.replace(unsorted.find("\"f\":1"), 5, "\"f\":0");
    CHECK(parse_error_code(unsorted) != ErrorCode::Internal);

    std::string outside = kTwoFrames;
    outside.replace(outside.find("\"x2\":30"), 7, "\"x2\":700");
    CHECK(parse_error_code(outside) != ErrorCode::Internal);

    CHECK(parse_error_code("{not json") == ErrorCode::Parse);
    CHECK(parse_error_text("{not json").find("line 1") != std::string::npos);
}

TEST_CASE("serialize and parse round-trip random datasets") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        Dataset ds;
        for (int i = 0; i < 5; ++i) ds.tracks.push_back(test::random_track(rng, "t" + std::to_string(i), 1 + rep));
        const auto text = serialize_tracks_string(ds);
        CHECK(parse_tracks_string(text) == ds);
    }
}

TEST_CASE("normalize_box examples") {
    auto n = normalize_box({320, 180, 960, 540}, 1280, 720);
    CHECK(n == NormBox{-0.25, -0.25, 0.25, 0.25});
    CHECK(n.xc() == 0.0);
    CHECK(n.yc() == 0.0);
    CHECK(n.area() == doctest::Approx(0.25).epsilon(1e-15));

    n = normalize_box({0, 0, 1280, 720}, 1280, 720);
    CHECK(n == NormBox{-0.5, -0.5, 0.5, 0.5});
    CHECK(n.area() == 1.0);

    // Independent arithmetic: center of [640, 641] is 640.5 px.
    n = normalize_box({640, 360, 641, 361}, 1280, 720);
    CHECK(n.xc() == doctest::Approx(640.5 / 1280 - 0.5).epsilon(1e-12));
    CHECK(n.xc() == doctest::Approx(0.000390625).epsilon(1e-12));
    CHECK(n.yc() == doctest::Approx(360.5 / 720 - 0.5).epsilon(1e-12));
    CHECK(n.area() == doctest::Approx((1.0 / 1280) * (1.0 / 720)).epsilon(1e-9));

    CHECK_THROWS_AS(normalize_box({0, 0, 1, 1}, 0, 720), Error);
    CHECK_THROWS_AS(normalize_box({0, 0, 1, 1}, 1280, -1), Error);
}

TEST_CASE("denormalize inverts normalize") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double W = 1 + u(rng) * 4000, H = 1 + u(rng) * 4000;
        const double x1 = u(rng) * W * 0.9, y1 = u(rng) * H * 0.9;
        const PixelBox b{x1, y1, x1 + (W - x1) * (0.01 + 0.99 * u(rng)), y1 + (H - y1) * (0.01 + 0.99 * u(rng))};
        const auto n = normalize_box(b, W, H);
        for (double v : {n.x1, n.y1, n.x2, n.y2}) {
            CHECK(v >= -0.5);
            CHECK(v <= 0.5);
        }
        const auto back = denormalize_box(n, W, H);
        const double scale = std::max(W, H);
        CHECK(std::abs(back.x1 - b.x1) <= 1e-9 * scale);
        CHECK(std::abs(back.y1 - b.y1) <= 1e-9 * scale);
        CHECK(std::abs(back.x2 - b.x2) <= 1e-9 * scale);
        CHECK(std::abs(back.y2 - b.y2) <= 1e-9 * scale);
    }
}

TEST_CASE("iou examples") {
    CHECK(iou({0, 0, 2, 2}, {0, 0, 2, 2}) == 1.0);
    CHECK(iou({0, 0, 2, 2}, {5, 5, 6, 6}) == 0.0);
    CHECK(iou({0, 0, 2, 2}, {2, 0, 4, 2}) == 0.0);
    CHECK(iou({0, 0, 2, 2}, {1, 1, 3, 3}) == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
}

TEST_CASE("classify_track") {
    CHECK(classify_track(make_track(flags_of("PPP"))) == TrackKind::Passive);
    CHECK(classify_track(make_track(flags_of("PPAA"))) == TrackKind::Mixed);
    CHECK(classify_track(make_track(flags_of("AAA"))) == TrackKind::ActiveOnly);
    CHECK(std::string(to_string(TrackKind::Mixed)) == "mixed");
}

TEST_CASE("activation_points examples") {
    CHECK(activation_points(make_track(flags_of("PPAA"))) == std::vector<std::size_t>{2});
    CHECK(activation_points(make_track(flags_of("PAPA"))) == std::vector<std::size_t>{1, 3});
    CHECK(activation_points(make_track(flags_of("PPP"))).empty());
    CHECK(activation_points(make_track(flags_of("APA"))) == std::vector<std::size_t>{2});
}

TEST_CASE("activation_points agree with a direct scan on random flags") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 500; ++rep) {
        std::vector<bool> flags(1 + rng() % 40);
        for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = rng() % 3 == 0;
        const auto pts = activation_points(make_track(flags));
        std::vector<std::size_t> expect;
        for (std::size_t i = 1; i < flags.size(); ++i)
            if (flags[i] && !flags[i - 1]) expect.push_back(i);
        CHECK(pts == expect);
        for (std::size_t k = 1; k < pts.size(); ++k) CHECK(pts[k] > pts[k - 1]);
    }
}

TEST_CASE("densify fills gaps by linear interpolation") {
    ObjectTrack t = make_track({false, false});
    t.frames[0] = {0, {0, 0, 100, 50}, false, true};
    t.frames[1] = {30, {60, 30, 160, 110}, false, true};
    const auto d = densify(t);
    REQUIRE(d.frames.size() == 31);
    for (int i = 0; i <= 30; ++i) CHECK(d.frames[static_cast<std::size_t>(i)].frame_index == i);
    CHECK(d.frames[15].box.x1 == doctest::Approx(30));
    CHECK(d.frames[15].box.y1 == doctest::Approx(15));
    CHECK(d.frames[15].box.x2 == doctest::Approx(130));
    CHECK(d.frames[15].box.y2 == doctest::Approx(80));
    CHECK_FALSE(d.frames[15].annotated);
    CHECK(d.frames[0].annotated);
    CHECK(d.frames[30].annotated);
    CHECK(d.frames[0] == t.frames[0]);
    CHECK(d.frames[30] == t.frames[1]);
}

TEST_CASE("densify carries the preceding flag forward") {
    ObjectTrack t = make_track({false, true});
    t.frames[1].frame_index = 30;
    const auto d = densify(t);
    REQUIRE(d.frames.size() == 31);
    for (int i = 1; i < 30; ++i) CHECK_FALSE(d.frames[static_cast<std::size_t>(i)].active);
    CHECK(activation_points(d) == std::vector<std::size_t>{30});
}

TEST_CASE("densify is the identity on dense tracks and idempotent") {
    const auto dense = make_track(flags_of("PPAAP"));
    CHECK(densify(dense) == dense);
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 100; ++rep) {
        const auto t = test::random_track(rng, "r", 1 + static_cast<int>(rng() % 30));
        const auto once = densify(t);
        CHECK(densify(once) == once);
        CHECK(once.frames.size() == static_cast<std::size_t>(t.frames.back().frame_index - t.frames.front().frame_index + 1));
        validate_track(once);
    }
}

TEST_CASE("split_by_subject partitions by subject") {
    Dataset ds;
    int k = 0;
    for (const char* s : {"a", "b", "c", "b", "a"})
        ds.tracks.push_back(make_track(flags_of("PP"), "t" + std::to_string(k++), 0, s));
    const auto [train, test] = split_by_subject(ds, "b");
    CHECK(test.tracks.size() == 2);
    CHECK(train.tracks.size() == 3);
    for (const auto& t : test.tracks) CHECK(t.subject_id == "b");
    for (const auto& t : train.tracks) CHECK(t.subject_id != "b");
    CHECK(subjects(ds) == std::vector<std::string>{"a", "b", "c"});
    CHECK_THROWS_AS(split_by_subject(ds, "z"), Error);
}

TEST_CASE("split_by_subject with a single subject warns about the empty train set") {
    Dataset ds;
    ds.tracks.push_back(make_track(flags_of("PP"), "t", 0, "only"));
    std::vector<std::string> warnings;
    set_warning_sink([&](const std::string& m) { warnings.push_back(m); });
    const auto [train, test] = split_by_subject(ds, "only");
    reset_warning_sink();
    CHECK(train.tracks.empty());
    CHECK(test.tracks.size() == 1);
    CHECK(warnings.size() == 1);
}

TEST_CASE("split_by_subject is a partition for every subject") {
    std::mt19937_64 rng(21);
    Dataset ds;
    for (int i = 0; i < 30; ++i) ds.tracks.push_back(test::random_track(rng, "t" + std::to_string(i), 3));
    for (const auto& s : subjects(ds)) {
        const auto [train, test] = split_by_subject(ds, s);
        CHECK(train.tracks.size() + test.tracks.size() == ds.tracks.size());
        for (const auto& a : train.tracks)
            for (const auto& b : test.tracks) CHECK(a.track_id != b.track_id);
    }
}
