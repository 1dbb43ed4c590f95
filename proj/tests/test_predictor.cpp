#include <doctest.h>

#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include "naop/eval.hpp"
#include "naop/predictor.hpp"
#include "naop/synthgen.hpp"

using namespace naop;

namespace {

const FoldModel& synth_model() {
    static const FoldModel model = [] {
        ScenarioConfig sc;
        sc.seed = 5;
        ProtocolConfig pc;
        pc.seed = 5;
        return train_method(gen_dataset(sc), pc, 5);
    }();
    return model;
}

// Track whose normalized center moves along (cx(i), cy(i)) with area a(i), in a 1280x960 frame.
template <class Fx, class Fy, class Fa>
ObjectTrack path_track(const std::string& id, int first, int n, Fx cx, Fy cy, Fa area) {
    ObjectTrack t;
    t.track_id = id;
    t.subject_id = "s";
    t.video_id = "vid";
    t.object_class = "mug";
    t.frame_width = 1280;
    t.frame_height = 960;
    for (int i = 0; i < n; ++i) {
        const double half = 0.5 * std::sqrt(area(i));
        const NormBox b{cx(i) - half, cy(i) - half, cx(i) + half, cy(i) + half};
        t.frames.push_back({first + i, denormalize_box(b, 1280, 960), false, true});
    }
    return t;
}

TrackSnapshot snapshot_of(const ObjectTrack& t, std::size_t upto) {
    return {&t.track_id, &t.video_id, &t.object_class, t.frame_width, t.frame_height,
            std::span<const TrackFrame>(t.frames).first(upto), 1.0};
}

std::vector<Detection> perfect_detections(const Dataset& ds) {
    std::vector<Detection> out;
    for (const auto& t : ds.tracks)
        for (const auto& f : t.frames) out.push_back({t.video_id, f.frame_index, t.object_class, f.box, 1.0});
    std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
        return std::tie(a.video_id, a.frame_index) < std::tie(b.video_id, b.frame_index);
    });
    return out;
}

Dataset three_disjoint_tracks() {
    Dataset ds;
    ds.tracks.push_back(path_track("a", 0, 70, [](int i) { return -0.3 + 0.001 * i; }, [](int) { return -0.3; },
                                   [](int) { return 0.01; }));
    ds.tracks.push_back(path_track("b", 10, 50, [](int) { return 0.3; }, [](int i) { return 0.3 - 0.002 * i; },
                                   [](int i) { return 0.01 * std::pow(1.02, i); }));
    ds.tracks.push_back(path_track("c", 25, 40, [](int i) { return 0.25 - 0.004 * i; }, [](int) { return -0.2; },
                                   [](int) { return 0.004; }));
    return ds;
}

}  // namespace

TEST_CASE("forest scorer discards tracks shorter than the window") {
    const auto& model = synth_model();
    ProtocolConfig pc;
    const auto scorer = model.scorer(pc);
    const auto t = path_track("x", 0, 40, [](int) { return 0.0; }, [](int) { return 0.0; }, [](int) { return 0.02; });
    const auto short_snap = snapshot_of(t, 29);
    CHECK(predict_frame(std::span(&short_snap, 1), 28, *scorer).empty());
    const auto ok = snapshot_of(t, 30);
    const auto p = predict_frame(std::span(&ok, 1), 29, *scorer);
    REQUIRE(p.size() == 1);
    CHECK(p[0].box == t.frames[29].box);
}

TEST_CASE("two eligible tracks give two bounded predictions") {
    const auto& model = synth_model();
    const auto scorer = model.scorer(ProtocolConfig{});
    const auto a = path_track("a", 0, 30, [](int) { return 0.1; }, [](int) { return 0.0; }, [](int) { return 0.02; });
    const auto b = path_track("b", 0, 30, [](int i) { return -0.2 + 0.001 * i; }, [](int) { return 0.1; },
                              [](int) { return 0.01; });
    const TrackSnapshot snaps[] = {snapshot_of(a, 30), snapshot_of(b, 30)};
    const auto p = predict_frame(snaps, 29, *scorer);
    REQUIRE(p.size() == 2);
    for (const auto& x : p) {
        CHECK(x.confidence >= 0.0);
        CHECK(x.confidence <= 1.0);
    }
}

TEST_CASE("an approaching object outscores a peripheral shrinking one") {
    const auto scorer = synth_model().scorer(ProtocolConfig{});
    const auto approach = path_track("a", 0, 30, [](int i) { return 0.2 * std::pow(0.94, i); },
                                     [](int i) { return 0.15 * std::pow(0.94, i); },
                                     [](int i) { return 0.01 * std::pow(1.03, i); });
    const auto shrink = path_track("s", 0, 30, [](int) { return 0.35; }, [](int) { return -0.3; },
                                   [](int i) { return 0.02 * std::pow(0.98, i); });
    const auto a = snapshot_of(approach, 30), s = snapshot_of(shrink, 30);
    CHECK(scorer->score(a) > scorer->score(s));
}

TEST_CASE("center-bias and random scorers") {
    CenterBiasScorer center;
    const auto mid = path_track("m", 0, 1, [](int) { return 0.0; }, [](int) { return 0.0; }, [](int) { return 0.01; });
    const auto off = path_track("o", 0, 1, [](int) { return 0.3; }, [](int) { return 0.4; }, [](int) { return 0.01; });
    auto snap = snapshot_of(mid, 1);
    CHECK(center.score(snap) == doctest::Approx(1.0));
    snap.detection_score = 0.8;
    CHECK(center.score(snap) == doctest::Approx(0.8));
    CHECK(center.score(snapshot_of(off, 1)) == doctest::Approx(1.0 - 0.5 / (std::sqrt(2.0) / 2)).epsilon(1e-9));

    RandomScorer r(3), r2(3), other(4);
    const auto t = three_disjoint_tracks().tracks[0];
    double sum = 0;
    int differ = 0;
    for (std::size_t i = 1; i <= t.frames.size(); ++i) {
        const auto s = snapshot_of(t, i);
        const double v = r.score(s);
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
        CHECK(v == r2.score(s));
        differ += v != other.score(s);
        sum += v;
    }
    CHECK(differ == static_cast<int>(t.frames.size()));
    CHECK(sum / double(t.frames.size()) == doctest::Approx(0.5).epsilon(0.3));
}

TEST_CASE("run_offline examples") {
    const auto& model = synth_model();
    const auto scorer = model.scorer(ProtocolConfig{});
    Dataset one;
    one.tracks.push_back(path_track("x", 100, 30, [](int) { return 0.0; }, [](int) { return 0.0; },
                                    [](int) { return 0.02; }));
    const auto p = run_offline(one, *scorer);
    REQUIRE(p.size() == 1);
    CHECK(p[0].frame_index == 129);
    CHECK(run_offline(Dataset{}, *scorer).empty());

    ScenarioConfig sc;
    sc.n_subjects = 2;
    sc.videos_per_subject = 1;
    sc.tracks_per_video = 8;
    sc.seed = 9;
    const auto ds = gen_dataset(sc);
    const auto whole = run_offline(ds, *scorer);
    Dataset a, b;
    for (std::size_t i = 0; i < ds.tracks.size(); ++i) (i % 2 ? a : b).tracks.push_back(ds.tracks[i]);
    auto merged = run_offline(a, *scorer);
    const auto rest = run_offline(b, *scorer);
    merged.insert(merged.end(), rest.begin(), rest.end());
    sort_predictions(merged);
    CHECK(merged == whole);
    CHECK(run_offline(ds, *scorer, 3) == whole);
    for (std::size_t i = 1; i < whole.size(); ++i)
        CHECK(std::tie(whole[i - 1].video_id, whole[i - 1].frame_index) <=
              std::tie(whole[i].video_id, whole[i].frame_index));
}

TEST_CASE("run_online warm-up, filtering and replay") {
    const auto scorer = synth_model().scorer(ProtocolConfig{});
    const auto ds = three_disjoint_tracks();
    const auto dets = perfect_detections(ds);
    const auto p = run_online(dets, AssocConfig{}, *scorer, 1280, 960);
    std::map<std::string, int> first_frame;
    for (const auto& x : p)
        if (!first_frame.count(x.source_track_id)) first_frame[x.source_track_id] = x.frame_index;
    REQUIRE(first_frame.size() == 3);
    std::vector<int> starts;
    for (const auto& [id, f] : first_frame) starts.push_back(f);
    std::sort(starts.begin(), starts.end());
    CHECK(starts == std::vector<int>{29, 39, 54});
    CHECK(run_online(dets, AssocConfig{}, *scorer, 1280, 960) == p);

    auto weak = dets;
    for (auto& d : weak) d.score = 0.5;
    CHECK(run_online(weak, AssocConfig{}, *scorer, 1280, 960).empty());

    auto backwards = dets;
    std::reverse(backwards.begin(), backwards.end());
    CHECK_THROWS(run_online(backwards, AssocConfig{}, *scorer, 1280, 960));
}

TEST_CASE("online and offline agree on perfect detections") {
    const auto scorer = synth_model().scorer(ProtocolConfig{});
    const auto ds = three_disjoint_tracks();
    const auto offline = run_offline(ds, *scorer);
    const auto online = run_online(perfect_detections(ds), AssocConfig{}, *scorer, 1280, 960);
    REQUIRE(online.size() == offline.size());
    // Key by (frame, box): each frame holds disjoint boxes.
    std::map<std::tuple<int, double, double>, double> by_key;
    for (const auto& x : offline) by_key[{x.frame_index, x.box.x1, x.box.y1}] = x.confidence;
    for (const auto& x : online) {
        const auto it = by_key.find({x.frame_index, x.box.x1, x.box.y1});
        REQUIRE(it != by_key.end());
        CHECK(x.confidence == it->second);
    }
}

TEST_CASE("prediction CSV round trip") {
    std::vector<ScoredPrediction> p{{"v1", 3, "tv remote", {1, 2, 3.5, 4}, 0.25, "t1"},
                                    {"v1", 4, "mug", {10, 20, 30, 40.125}, 1.0, "t2"}};
    std::ostringstream out;
    write_predictions(p, out);
    CHECK(out.str().rfind("video_id,frame,class,x1,y1,x2,y2,confidence,track_id\n", 0) == 0);
    std::istringstream in(out.str());
    CHECK(parse_predictions(in) == p);
}

TEST_CASE("offline scoring sustains 50k windows per second on one thread") {
    const auto& model = synth_model();
    const auto scorer = model.scorer(ProtocolConfig{});
    ScenarioConfig sc;
    sc.seed = 21;
    const auto ds = gen_dataset(sc);
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = run_offline(ds, *scorer, 1);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double rate = static_cast<double>(p.size()) / std::max(secs, 1e-9);
    MESSAGE(p.size() << " windows in " << secs << " s (" << rate << " per second)");
    REQUIRE(p.size() > 10000);
    CHECK(rate >= 50000.0);
}
