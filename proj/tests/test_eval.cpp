#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <tuple>

#include "naop/error.hpp"
#include "naop/eval.hpp"
#include "naop/log.hpp"
#include "naop/synthgen.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace naop;
using naop::test::make_track;
using naop::test::run_flags;
using namespace naop::test;

namespace {

std::vector<LabeledPrediction> labels(std::initializer_list<std::pair<double, bool>> l) {
    std::vector<LabeledPrediction> out;
    for (auto [c, tp] : l) out.push_back({c, tp});
    return out;
}

ScenarioConfig small_scenario(std::uint64_t seed) {
    ScenarioConfig sc;
    sc.n_subjects = 3;
    sc.videos_per_subject = 2;
    sc.tracks_per_video = 20;
    sc.seed = seed;
    return sc;
}

ProtocolConfig quick_protocol(std::uint64_t seed) {
    ProtocolConfig pc;
    pc.seed = seed;
    pc.train.n_trees = 10;
    return pc;
}

}  // namespace

TEST_CASE("build_gt marks only passive frames of mixed tracks as valid") {
    Dataset ds;
    ds.tracks.push_back(make_track(run_flags({{100, false}, {50, true}}), "mixed"));
    ds.tracks.push_back(make_track(run_flags({{40, false}}), "passive"));
    const auto gt = build_gt(ds);
    REQUIRE(gt.size() == 190);
    for (std::size_t i = 0; i < 150; ++i) {
        CHECK(gt[i].source_track_id == "mixed");
        CHECK(gt[i].valid == (i < 100));
        CHECK(gt[i].active == (i >= 100));
    }
    for (std::size_t i = 150; i < 190; ++i) {
        CHECK_FALSE(gt[i].valid);
        CHECK_FALSE(gt[i].active);
    }
    CHECK(count_valid(gt) == 100);

    Dataset only_active;
    only_active.tracks.push_back(make_track(run_flags({{10, true}})));
    int warnings = 0;
    set_warning_sink([&](const std::string&) { ++warnings; });
    CHECK(count_valid(build_gt(only_active)) == 0);
    reset_warning_sink();
    CHECK(warnings == 1);
}

TEST_CASE("match_predictions examples") {
    const std::vector<GtEntry> gt{gt_entry("v", 0, "mug", {0, 0, 10, 10}, true),
                                  gt_entry("v", 0, "mug", {50, 50, 60, 60}, false, true)};
    {
        const std::vector<ScoredPrediction> p{pred("v", 0, "mug", {0, 0, 10, 10}, 0.7)};
        CHECK(match_predictions(p, gt)[0].true_positive);
    }
    {
        const std::vector<ScoredPrediction> p{pred("v", 0, "mug", {0, 0, 10, 10}, 0.3),
                                              pred("v", 0, "mug", {1, 0, 11, 10}, 0.9)};
        const auto m = match_predictions(p, gt);
        CHECK_FALSE(m[0].true_positive);
        CHECK(m[1].true_positive);
    }
    {
        const std::vector<ScoredPrediction> p{pred("v", 0, "mug", {50, 50, 60, 60}, 0.9)};
        CHECK_FALSE(match_predictions(p, gt)[0].true_positive);
    }
    {
        const std::vector<ScoredPrediction> p{pred("v", 0, "pan", {0, 0, 10, 10}, 0.9),
                                              pred("v", 1, "mug", {0, 0, 10, 10}, 0.9),
                                              pred("v", 0, "mug", {5, 5, 15, 15}, 0.9)};
        for (const auto& l : match_predictions(p, gt)) CHECK_FALSE(l.true_positive);
    }
}

TEST_CASE("pr_and_ap examples") {
    CHECK(pr_and_ap(labels({{0.9, true}}), 1).ap == 1.0);
    const auto r = pr_and_ap(labels({{0.9, true}, {0.8, false}, {0.7, true}}), 2);
    CHECK(r.ap == doctest::Approx(0.5 * 1.0 + 0.5 * (2.0 / 3.0)).epsilon(1e-15));
    CHECK(r.ap == doctest::Approx(0.8333333333333334));
    REQUIRE(r.pr.size() == 3);
    CHECK(r.pr[1].precision == 0.5);
    CHECK(r.counts.tp == 2);
    CHECK(r.counts.fp == 1);
    CHECK(pr_and_ap(labels({{0.9, false}, {0.5, false}}), 3).ap == 0.0);
    CHECK(pr_and_ap(labels({{0.9, true}, {0.8, true}, {0.1, false}}), 2).ap == 1.0);
    CHECK_THROWS_AS(pr_and_ap(labels({{0.9, true}}), 0), Error);
}

TEST_CASE("pr_and_ap agrees with a brute-force re-evaluator") {
    std::mt19937_64 rng(61);
    for (int rep = 0; rep < 200; ++rep) {
        const auto f = random_fixture(rng);
        const auto report = evaluate_detections(f.preds, f.gt, 0.5);
        const auto curve = brute_curve(f.preds, f.gt, 0.5);
        REQUIRE(report.pr.size() == curve.size());
        for (std::size_t i = 0; i < curve.size(); ++i) {
            CHECK(report.pr[i].threshold == curve[i].threshold);
            CHECK(std::abs(report.pr[i].precision - curve[i].precision) <= 1e-10);
            CHECK(std::abs(report.pr[i].recall - curve[i].recall) <= 1e-10);
        }
        CHECK(std::abs(report.ap - brute_ap(curve)) <= 1e-10);
        CHECK(report.ap >= 0.0);
        CHECK(report.ap <= 1.0);
        CHECK(report.counts.tp + report.counts.fp == report.counts.n_predictions);
        CHECK(report.counts.tp <= report.counts.n_valid_gt);
    }
}

TEST_CASE("matching ignores input order when confidences are distinct") {
    std::mt19937_64 rng(62);
    for (int rep = 0; rep < 100; ++rep) {
        auto f = random_fixture(rng);
        for (std::size_t i = 0; i < f.preds.size(); ++i) f.preds[i].confidence = (double(i) + 0.5) / 1000.0;
        std::shuffle(f.preds.begin(), f.preds.end(), rng);
        const auto a = match_predictions(f.preds, f.gt);
        std::vector<std::size_t> perm(f.preds.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<ScoredPrediction> shuffled;
        for (auto i : perm) shuffled.push_back(f.preds[i]);
        const auto b = match_predictions(shuffled, f.gt);
        for (std::size_t k = 0; k < perm.size(); ++k) CHECK(b[k].true_positive == a[perm[k]].true_positive);
    }
}

TEST_CASE("active_fire_rate") {
    const std::vector<GtEntry> gt{gt_entry("v", 0, "mug", {0, 0, 10, 10}, true),
                                  gt_entry("v", 1, "mug", {0, 0, 10, 10}, false, true),
                                  gt_entry("v", 2, "mug", {0, 0, 10, 10}, false, true)};
    const std::vector<ScoredPrediction> p{pred("v", 0, "mug", {0, 0, 10, 10}, 0.6),
                                          pred("v", 1, "mug", {0, 0, 10, 10}, 0.9),
                                          pred("v", 2, "mug", {0, 0, 10, 10}, 0.4)};
    const std::vector<double> th{0.3, 0.5, 0.8, 0.95};
    const auto rows = active_fire_rate(p, gt, th);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].frac_active_fired == 1.0);
    CHECK(rows[1].frac_active_fired == 0.5);
    CHECK(rows[1].precision == 0.5);
    CHECK(rows[1].recall == 1.0);
    CHECK(rows[2].frac_active_fired == 0.5);
    CHECK(rows[2].recall == 0.0);
    CHECK(rows[3].frac_active_fired == 0.0);
    CHECK(rows[3].recall == 0.0);
    CHECK(rows[3].precision == 0.0);

    const std::vector<GtEntry> none{gt_entry("v", 0, "mug", {0, 0, 10, 10}, true)};
    CHECK_THROWS_AS(active_fire_rate(p, none, th), Error);
}

TEST_CASE("fire rate is non-increasing in the threshold") {
    std::mt19937_64 rng(63);
    std::vector<double> th;
    for (int i = 0; i <= 20; ++i) th.push_back(0.05 * i);
    for (int rep = 0; rep < 100; ++rep) {
        auto f = random_fixture(rng);
        f.gt[0].active = true;
        const auto rows = active_fire_rate(f.preds, f.gt, th);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CHECK(rows[i].frac_active_fired <= rows[i - 1].frac_active_fired);
            CHECK(rows[i].recall <= rows[i - 1].recall);
        }
    }
}

TEST_CASE("lopo runs one fold per subject with no leakage") {
    const auto ds = gen_dataset(small_scenario(3));
    std::vector<std::string> seen;
    std::mutex m;
    const auto report = lopo(
        ds,
        [&](const Dataset& train, const Dataset& test, std::uint64_t) {
            std::set<std::string> held;
            for (const auto& t : test.tracks) held.insert(t.subject_id);
            REQUIRE(held.size() == 1);
            for (const auto& t : train.tracks) REQUIRE(held.count(t.subject_id) == 0);
            CHECK(train.tracks.size() + test.tracks.size() == ds.tracks.size());
            std::lock_guard lock(m);
            seen.push_back(*held.begin());
            EvalReport r;
            r.counts.n_valid_gt = 1;
            r.counts.n_predictions = 4;
            r.ap = 0.1 * double(seen.size());
            return r;
        },
        1, 1);
    CHECK(report.folds.size() == 3);
    CHECK(seen.size() == 3);
    CHECK(report.mean_ap == doctest::Approx((0.1 + 0.2 + 0.3) / 3));

    const auto real = lopo_trajectories(ds, quick_protocol(1));
    REQUIRE(real.folds.size() == 3);
    double sum = 0;
    for (const auto& f : real.folds) sum += f.report.ap;
    CHECK(real.mean_ap == doctest::Approx(sum / 3));
    CHECK(real.mean_ap >= 0.9);

    Dataset one;
    one.tracks.push_back(ds.tracks[0]);
    CHECK_THROWS_AS(lopo_trajectories(one, quick_protocol(1)), Error);
}

TEST_CASE("lopo is deterministic and thread-count independent") {
    const auto ds = gen_dataset(small_scenario(4));
    auto pc = quick_protocol(2);
    const auto a = lopo_trajectories(ds, pc);
    pc.threads = 3;
    const auto b = lopo_trajectories(ds, pc);
    REQUIRE(a.folds.size() == b.folds.size());
    for (std::size_t i = 0; i < a.folds.size(); ++i) CHECK(a.folds[i].report.ap == b.folds[i].report.ap);
}

TEST_CASE("baselines on the same data") {
    const auto ds = gen_dataset(small_scenario(6));
    auto pc = quick_protocol(3);
    pc.method = Method::Motion;
    const auto motion = lopo_trajectories(ds, pc);
    CHECK(motion.mean_ap > motion.mean_positive_rate);
    pc.method = Method::CenterBias;
    CHECK(lopo_trajectories(ds, pc).mean_ap > 0.0);
    pc.method = Method::Random;
    const auto r = lopo_trajectories(ds, pc);
    CHECK(r.mean_ap < 0.7);
}

TEST_CASE("pyramid scheme trains and evaluates") {
    const auto ds = gen_dataset(small_scenario(7));
    auto pc = quick_protocol(4);
    pc.levels = 4;
    const auto r = lopo_trajectories(ds, pc);
    CHECK(r.levels == 4);
    CHECK(r.mean_ap >= 0.0);
    CHECK(r.mean_ap <= 1.0);
}

TEST_CASE("time-to-activation with offset 0 reproduces the standard evaluation") {
    const auto ds = densify(gen_dataset(small_scenario(8)));
    const auto [train, test] = split_by_subject(ds, "P01");
    const auto pc = quick_protocol(5);
    const auto model = train_method(train, pc, 11);
    const std::size_t offsets[] = {0};
    const auto rows = time_to_activation(model, test, offsets, pc, 21);
    const auto standard = evaluate_trajectories(model, extract_labeled(test, pc, 21), pc);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].ap == standard.ap);

    std::vector<std::size_t> eleven;
    for (std::size_t k = 0; k <= 100; k += 10) eleven.push_back(k);
    const auto many = lopo_time_to_activation(ds, eleven, pc);
    CHECK(many.size() == 11);
    for (std::size_t i = 0; i < many.size(); ++i) CHECK(many[i].offset == eleven[i]);
}

TEST_CASE("leave-one-object-out contrasts") {
    ScenarioConfig sc = small_scenario(9);
    sc.object_classes = {"fridge", "tap", "mug/cup", "odd"};
    sc.tracks_per_video = 40;
    ApproachModel odd;
    odd.growth = 0.97;
    odd.center_drift = false;
    sc.class_overrides["odd"] = odd;
    const auto ds = gen_dataset(sc);
    const auto pc = quick_protocol(6);

    const auto unique = looo(ds, "odd", pc);
    CHECK(unique.object_class == "odd");
    CHECK(unique.n_active > 0);
    CHECK(unique.ap_with > unique.ap_without);

    const auto shared = looo(ds, "tap", pc);
    CHECK(std::abs(shared.ap_with - shared.ap_without) <= 0.1);

    CHECK_THROWS_AS(looo(ds, "absent", pc), Error);
    CHECK(looo_all(ds, pc).size() == 4);
}

TEST_CASE("method names round trip") {
    for (auto m : {Method::Forest, Method::Motion, Method::Random, Method::CenterBias})
        CHECK(parse_method(to_string(m)) == m);
    CHECK_FALSE(parse_method("nope").has_value());
}
