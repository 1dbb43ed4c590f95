// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "naop/naop.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("naop_capi_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string path_of(const char* name) { return (scratch_dir() / name).string(); }

naop_dataset* small_dataset(uint64_t seed) {
    naop_scenario sc;
    naop_scenario_defaults(&sc);
    sc.n_subjects = 3;
    sc.tracks_per_video = 20;
    sc.seed = seed;
    naop_dataset* ds = nullptr;
    REQUIRE(naop_generate_dataset(&sc, &ds) == NAOP_OK);
    return ds;
}

std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("version and status names") {
    CHECK(std::strlen(naop_version()) > 0);
    CHECK(std::string(naop_status_name(NAOP_OK)) != std::string(naop_status_name(NAOP_E_PARSE)));
    CHECK(std::strlen(naop_status_name(static_cast<naop_status>(99))) > 0);
}

TEST_CASE("datasets round trip through files") {
    naop_dataset* ds = small_dataset(1);
    CHECK(naop_dataset_track_count(ds) == 3 * 2 * 20);
    CHECK(naop_dataset_frame_count(ds) > 0);
    const auto p = path_of("tracks.jsonl");
    REQUIRE(naop_dataset_save(ds, p.c_str()) == NAOP_OK);
    naop_dataset* back = nullptr;
    REQUIRE(naop_dataset_load(p.c_str(), &back) == NAOP_OK);
    CHECK(naop_dataset_track_count(back) == naop_dataset_track_count(ds));
    const auto p2 = path_of("tracks2.jsonl");
    REQUIRE(naop_dataset_save(back, p2.c_str()) == NAOP_OK);
    CHECK(slurp(p) == slurp(p2));
    naop_dataset_free(back);
    naop_dataset_free(ds);
}

TEST_CASE("errors map to status codes with messages") {
    naop_dataset* ds = nullptr;
    CHECK(naop_dataset_load(path_of("missing.jsonl").c_str(), &ds) == NAOP_E_IO);
    CHECK(ds == nullptr);
    CHECK(std::strlen(naop_last_error()) > 0);

    CHECK(naop_dataset_parse("{\"track_id\":", &ds) == NAOP_E_PARSE);
    CHECK(std::string(naop_last_error()).find("line 1") != std::string::npos);

    CHECK(naop_dataset_parse(nullptr, &ds) == NAOP_E_INVALID_ARGUMENT);
    CHECK(naop_generate_dataset(nullptr, &ds) == NAOP_E_INVALID_ARGUMENT);

    naop_scenario sc;
    naop_scenario_defaults(&sc);
    sc.active_fraction = 1.5;
    CHECK(naop_generate_dataset(&sc, &ds) == NAOP_E_INVALID_ARGUMENT);

    std::ofstream(path_of("junk.model")) << "definitely not a model";
    naop_forest* f = nullptr;
    CHECK(naop_forest_load(path_of("junk.model").c_str(), &f) == NAOP_E_FORMAT);
    CHECK(f == nullptr);
}

TEST_CASE("warnings reach the installed callback") {
    std::vector<std::string> got;
    naop_set_warning_callback([](const char* m, void* u) { static_cast<std::vector<std::string>*>(u)->push_back(m); },
                              &got);
    naop_dataset* passive = nullptr;
    REQUIRE(naop_dataset_parse(R"({"track_id":"a","subject_id":"s","video_id":"v","class":"mug","frame_width":100,)"
                               R"("frame_height":100,"frames":[{"f":0,"x1":1,"y1":1,"x2":5,"y2":5,"active":true,)"
                               R"("annotated":true}]})",
                               &passive) == NAOP_OK);
    naop_scorer* center = nullptr;
    REQUIRE(naop_scorer_center(&center) == NAOP_OK);
    naop_predictions* preds = nullptr;
    REQUIRE(naop_predict_offline(center, passive, 1, &preds) == NAOP_OK);
    naop_report* rep = nullptr;
    CHECK(naop_eval_predictions(preds, passive, 0.5, &rep) == NAOP_E_INVALID_ARGUMENT);
    naop_set_warning_callback(nullptr, nullptr);
    CHECK(got.size() == 1);
    naop_predictions_free(preds);
    naop_scorer_free(center);
    naop_dataset_free(passive);
}

TEST_CASE("train, save, load and predict") {
    naop_dataset* ds = small_dataset(2);
    naop_train_options opt;
    naop_train_options_defaults(&opt);
    CHECK(opt.n_trees == 25);
    CHECK(opt.h == 30);
    opt.n_trees = 8;
    opt.seed = 5;
    naop_forest* f = nullptr;
    REQUIRE(naop_train(ds, &opt, &f) == NAOP_OK);
    naop_forest_info info;
    REQUIRE(naop_forest_info_get(f, &info) == NAOP_OK);
    CHECK(info.dim == 6 * 30 - 3);
    CHECK(info.n_trees == 8);
    CHECK(std::string(info.variant) == "full");

    const auto p = path_of("m.model");
    REQUIRE(naop_forest_save(f, p.c_str()) == NAOP_OK);
    naop_forest* g = nullptr;
    REQUIRE(naop_forest_load(p.c_str(), &g) == NAOP_OK);
    std::vector<double> x(info.dim * 3);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(double(i)) * 0.2;
    double pf[3], pg[3];
    REQUIRE(naop_forest_predict_proba(f, x.data(), 3, pf) == NAOP_OK);
    REQUIRE(naop_forest_predict_proba(g, x.data(), 3, pg) == NAOP_OK);
    for (int i = 0; i < 3; ++i) {
        CHECK(pf[i] == pg[i]);
        CHECK(pf[i] >= 0.0);
        CHECK(pf[i] <= 1.0);
    }

    opt.variant = "sideways";
    naop_forest* bad = nullptr;
    CHECK(naop_train(ds, &opt, &bad) == NAOP_E_INVALID_ARGUMENT);

    naop_scorer* sc = nullptr;
    REQUIRE(naop_scorer_forest(g, &sc) == NAOP_OK);
    naop_predictions* preds = nullptr;
    REQUIRE(naop_predict_offline(sc, ds, 2, &preds) == NAOP_OK);
    REQUIRE(naop_predictions_count(preds) > 0);
    naop_prediction_view v;
    REQUIRE(naop_predictions_get(preds, 0, &v) == NAOP_OK);
    CHECK(v.confidence >= 0.0);
    CHECK(v.x2 > v.x1);
    CHECK(naop_predictions_get(preds, naop_predictions_count(preds), &v) == NAOP_E_INVALID_ARGUMENT);

    const auto pp = path_of("preds.csv");
    REQUIRE(naop_predictions_save(preds, pp.c_str()) == NAOP_OK);
    naop_predictions* back = nullptr;
    REQUIRE(naop_predictions_load(pp.c_str(), &back) == NAOP_OK);
    CHECK(naop_predictions_count(back) == naop_predictions_count(preds));

    naop_report* rep = nullptr;
    REQUIRE(naop_eval_predictions(back, ds, 0.5, &rep) == NAOP_OK);
    const double ap = naop_report_value(rep);
    CHECK(ap >= 0.0);
    CHECK(ap <= 1.0);
    CHECK(std::string(naop_report_json(rep)).find("\"ap\"") != std::string::npos);

    const double th[] = {0.5, 0.8, 0.9};
    naop_report* fire = nullptr;
    REQUIRE(naop_eval_fire_rate(back, ds, th, 3, 0.5, &fire) == NAOP_OK);
    const std::string csv = naop_report_csv(fire);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(std::isnan(naop_report_value(fire)));

    char* svg = nullptr;
    char* curves = nullptr;
    REQUIRE(naop_plot_pr(naop_report_json(rep), 320, 240, &svg, &curves) == NAOP_OK);
    CHECK(std::string(svg).find("<svg") != std::string::npos);
    naop_string_free(svg);
    naop_string_free(curves);

    naop_report_free(fire);
    naop_report_free(rep);
    naop_predictions_free(back);
    naop_predictions_free(preds);
    naop_scorer_free(sc);
    naop_forest_free(g);
    naop_forest_free(f);
    naop_dataset_free(ds);
}

TEST_CASE("protocols through the C interface") {
    naop_dataset* ds = small_dataset(3);
    naop_eval_options opt;
    naop_eval_options_defaults(&opt);
    opt.n_trees = 8;
    opt.seed = 4;
    naop_report* r = nullptr;
    REQUIRE(naop_eval_lopo(ds, &opt, 0, &r) == NAOP_OK);
    CHECK(naop_report_value(r) >= 0.9);
    naop_report_free(r);

    const size_t offsets[] = {0, 30, 60};
    REQUIRE(naop_eval_time(ds, &opt, offsets, 3, &r) == NAOP_OK);
    std::string csv = naop_report_csv(r);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    naop_report_free(r);

    REQUIRE(naop_eval_looo(ds, &opt, nullptr, &r) == NAOP_OK);
    naop_report_free(r);
    CHECK(naop_eval_looo(ds, &opt, "unicorn", &r) == NAOP_E_INVALID_ARGUMENT);

    const size_t hs[] = {15, 30};
    const int levels[] = {3};
    REQUIRE(naop_sweep(ds, &opt, hs, 2, levels, 1, "full,absolute", &r) == NAOP_OK);
    csv = naop_report_csv(r);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 6);
    naop_report_free(r);

    naop_detection_noise noise{0.0, 0.0, 0.0, 1};
    naop_detections* dets = nullptr;
    REQUIRE(naop_generate_detections(ds, &noise, &dets) == NAOP_OK);
    CHECK(naop_detections_count(dets) == naop_dataset_frame_count(ds));
    naop_tracker_options topt;
    naop_tracker_options_defaults(&topt);
    CHECK(topt.det_score_min == 0.8);
    naop_dataset* tracked = nullptr;
    REQUIRE(naop_track_detections(dets, &topt, 1280, 960, &tracked) == NAOP_OK);
    CHECK(naop_dataset_track_count(tracked) > 0);

    naop_scorer* rnd = nullptr;
    REQUIRE(naop_scorer_random(1, &rnd) == NAOP_OK);
    naop_predictions* online = nullptr;
    REQUIRE(naop_predict_online(rnd, dets, &topt, 1280, 960, &online) == NAOP_OK);
    CHECK(naop_predictions_count(online) > 0);

    double thr = 0;
    REQUIRE(naop_train_motion(ds, 30, 1, &thr) == NAOP_OK);
    CHECK(std::isfinite(thr));

    naop_predictions_free(online);
    naop_scorer_free(rnd);
    naop_dataset_free(tracked);
    naop_detections_free(dets);
    naop_dataset_free(ds);
    fs::remove_all(scratch_dir());
}
