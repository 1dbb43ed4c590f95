// naop: command-line front end over the C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "naop/naop.h"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 64;

struct CliError {
    int code;
    std::string message;
};

void check(naop_status status) {
    if (status != NAOP_OK) throw CliError{static_cast<int>(status), naop_last_error()};
}

void usage(const std::string& message) { throw CliError{kExitUsage, message}; }

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using Dataset = std::unique_ptr<naop_dataset, Deleter<naop_dataset, naop_dataset_free>>;
using Detections = std::unique_ptr<naop_detections, Deleter<naop_detections, naop_detections_free>>;
using Forest = std::unique_ptr<naop_forest, Deleter<naop_forest, naop_forest_free>>;
using Scorer = std::unique_ptr<naop_scorer, Deleter<naop_scorer, naop_scorer_free>>;
using Predictions = std::unique_ptr<naop_predictions, Deleter<naop_predictions, naop_predictions_free>>;
using Report = std::unique_ptr<naop_report, Deleter<naop_report, naop_report_free>>;

Dataset load_dataset(const std::string& path) {
    naop_dataset* d = nullptr;
    check(naop_dataset_load(path.c_str(), &d));
    return Dataset(d);
}

Detections load_detections(const std::string& path) {
    naop_detections* d = nullptr;
    check(naop_detections_load(path.c_str(), &d));
    return Detections(d);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliError{NAOP_E_IO, "cannot open '" + path + "' for writing"};
    out << text;
    if (!out) throw CliError{NAOP_E_IO, "failed writing '" + path + "'"};
}

std::string sibling(const std::string& path, const std::string& ext) {
    fs::path p(path);
    return p.replace_extension(ext).string();
}

// Options shared by several subcommands.
struct Common {
    std::string tracks, detections, model, predictions, report, out, config_variant = "full", method = "forest";
    std::vector<std::size_t> h{30};
    std::vector<int> levels;
    std::uint64_t seed = 0;
    int threads = 1;
    int n_trees = 25, max_depth = 0, features_per_split = 0, min_samples_leaf = 1;
    bool no_bootstrap = false;
    double iou_min = 0.5;
    std::string frame_size = "1280x960";
    double iou_threshold = 0.3, det_score_min = 0.8;
    int max_age = 5, min_hits = 1;
    bool no_class_gate = false;
};

void add_threads(CLI::App* app, Common& c) {
    app->add_option("--threads", c.threads, "Worker threads (results do not depend on it)")
        ->envname("NAOP_THREADS")
        ->check(CLI::Range(1, 1024))
        ->capture_default_str();
}

void add_forest_flags(CLI::App* app, Common& c) {
    app->add_option("--trees", c.n_trees, "Number of trees")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--max-depth", c.max_depth, "Maximum tree depth (0 = unbounded)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--features-per-split", c.features_per_split, "Features drawn per split (0 = ceil(sqrt(d)))")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--min-leaf", c.min_samples_leaf, "Minimum samples per leaf")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_flag("--no-bootstrap", c.no_bootstrap, "Grow every tree on the full training set");
}

void add_window_flags(CLI::App* app, Common& c, bool list) {
    auto* h = app->add_option("--h", c.h, list ? "Window lengths (comma-separated)" : "Window length in frames")
                  ->capture_default_str();
    if (list) {
        h->delimiter(',');
        app->add_option("--levels", c.levels, "Temporal-pyramid levels (comma-separated)")->delimiter(',');
    } else {
        h->expected(1);
        app->add_option("--levels", c.levels, "Temporal-pyramid levels (0 = fixed window)")->expected(1);
    }
}

void add_tracker_flags(CLI::App* app, Common& c) {
    app->add_option("--frame-size", c.frame_size, "Frame size WxH for detection input")->capture_default_str();
    app->add_option("--iou-threshold", c.iou_threshold, "Minimum IoU to associate a detection")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app->add_option("--max-age", c.max_age, "Frames a track survives without detections")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--min-hits", c.min_hits, "Updates before a track is reported")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--det-score-min", c.det_score_min, "Detections below this score are ignored")
        ->capture_default_str();
    app->add_flag("--no-class-gate", c.no_class_gate, "Allow associations across object classes");
}

std::pair<int, int> parse_frame_size(const std::string& s) {
    int w = 0, h = 0;
    char x = 0;
    std::istringstream is(s);
    if (!(is >> w >> x >> h) || (x != 'x' && x != 'X') || w <= 0 || h <= 0 || !is.eof())
        usage("--frame-size expects WxH, got '" + s + "'");
    return {w, h};
}

naop_tracker_options tracker_options(const Common& c) {
    naop_tracker_options o;
    naop_tracker_options_defaults(&o);
    o.iou_threshold = c.iou_threshold;
    o.max_age = c.max_age;
    o.min_hits = c.min_hits;
    o.det_score_min = c.det_score_min;
    o.class_gated = !c.no_class_gate;
    return o;
}

std::size_t single_h(const Common& c) {
    if (c.h.size() != 1) usage("--h takes a single value here");
    return c.h.front();
}

int single_level(const Common& c) {
    if (c.levels.size() > 1) usage("--levels takes a single value here");
    return c.levels.empty() ? 0 : c.levels.front();
}

naop_eval_options eval_options(const Common& c) {
    naop_eval_options o;
    naop_eval_options_defaults(&o);
    o.method = c.method.c_str();
    o.variant = c.config_variant.c_str();
    o.h = single_h(c);
    o.levels = single_level(c);
    o.n_trees = c.n_trees;
    o.max_depth = c.max_depth;
    o.features_per_split = c.features_per_split;
    o.min_samples_leaf = c.min_samples_leaf;
    o.bootstrap = !c.no_bootstrap;
    o.seed = c.seed;
    o.threads = c.threads;
    o.iou_min = c.iou_min;
    return o;
}

void write_report(const naop_report* r, const std::string& out, std::vector<std::string>& outputs) {
    write_text(out, naop_report_json(r));
    const std::string csv = sibling(out, ".csv");
    write_text(csv, naop_report_csv(r));
    outputs.push_back(out);
    outputs.push_back(csv);
    const double v = naop_report_value(r);
    if (!std::isnan(v)) std::cout << "AP " << v << '\n';
}

std::string timestamp() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

ordered_json option_snapshot(const CLI::App* app) {
    ordered_json cfg = ordered_json::object();
    for (const CLI::Option* opt : app->get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string name = opt->get_lnames().front();
        if (name == "help" || name == "config") continue;
        if (opt->count() > 0) {
            const auto& res = opt->results();
            cfg[name] = opt->get_expected_max() == 0 ? ordered_json(true)
                        : res.size() == 1              ? ordered_json(res.front())
                                                       : ordered_json(res);
        } else if (opt->get_expected_max() == 0) {
            cfg[name] = false;
        } else {
            cfg[name] = opt->get_default_str();
        }
    }
    return cfg;
}

int run(std::vector<std::string> args);

int dispatch(std::vector<std::string> args) {
    CLI::App app{"Next-active-object prediction from object trajectories", "naop"};
    app.set_help_flag("--help", "Print this help message and exit");  // -h is taken by --h
    app.set_version_flag("--version", std::string(naop_version()));
    app.set_config("--config", "", "TOML/INI file with default flag values (flags on the command line win)");
    app.require_subcommand(1);
    app.fallthrough(false);

    Common c;
    std::vector<std::string> inputs, outputs;
    ordered_json seeds = ordered_json::object();
    std::function<void()> action;

    // gen ----------------------------------------------------------------
    naop_scenario sc;
    naop_scenario_defaults(&sc);
    naop_detection_noise dn{0.0, 0.0, 0.0, 0};
    std::string classes;
    bool no_drift = false, no_growth = false;
    std::uint64_t det_seed = 0;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic track file (and optionally detections)");
    gen->add_option("--out", c.out, "Output track file (JSON Lines)")->required();
    gen->add_option("--detections", c.detections, "Also write noisy detections to this CSV");
    gen->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    gen->add_option("--subjects", sc.n_subjects, "Number of subjects")->check(CLI::PositiveNumber)->capture_default_str();
    gen->add_option("--videos", sc.videos_per_subject, "Videos per subject")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    gen->add_option("--tracks-per-video", sc.tracks_per_video, "Tracks per video")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    gen->add_option("--classes", classes, "Comma-separated object classes");
    gen->add_option("--active-fraction", sc.active_fraction, "Share of tracks that become active")
        ->capture_default_str();
    gen->add_option("--h-signal", sc.h_signal, "Approach frames before activation")->capture_default_str();
    gen->add_option("--center-noise", sc.center_noise, "Center jitter sigma (normalized units)")->capture_default_str();
    gen->add_option("--scale-noise", sc.scale_noise, "Log-area jitter sigma")->capture_default_str();
    gen->add_option("--annotate-every", sc.annotate_every, "Keep every n-th frame as an annotation")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    gen->add_option("--growth", sc.growth, "Per-frame area factor while approaching")->capture_default_str();
    gen->add_option("--pull", sc.pull, "Per-frame pull toward the frame center while approaching")
        ->capture_default_str();
    gen->add_flag("--no-center-drift", no_drift, "Approach by scale growth only");
    gen->add_flag("--no-scale-growth", no_growth, "Approach by center drift only");
    gen->add_option("--det-sigma", dn.sigma_px, "Detection corner noise in pixels")->capture_default_str();
    gen->add_option("--fp-rate", dn.fp_rate, "Mean spurious detections per frame")->capture_default_str();
    gen->add_option("--fn-rate", dn.fn_rate, "Probability of dropping a true detection")->capture_default_str();
    gen->add_option("--det-seed", det_seed, "Detection noise seed (default: --seed)");
    gen->callback([&] {
        action = [&] {
            sc.seed = c.seed;
            sc.object_classes = classes.empty() ? nullptr : classes.c_str();
            sc.center_drift = !no_drift;
            sc.scale_growth = !no_growth;
            naop_dataset* d = nullptr;
            check(naop_generate_dataset(&sc, &d));
            Dataset ds(d);
            check(naop_dataset_save(ds.get(), c.out.c_str()));
            outputs.push_back(c.out);
            seeds["seed"] = c.seed;
            if (!c.detections.empty()) {
                dn.seed = gen->count("--det-seed") ? det_seed : c.seed;
                naop_detections* det = nullptr;
                check(naop_generate_detections(ds.get(), &dn, &det));
                Detections dets(det);
                check(naop_detections_save(dets.get(), c.detections.c_str()));
                outputs.push_back(c.detections);
                seeds["det_seed"] = dn.seed;
            }
            std::cout << naop_dataset_track_count(ds.get()) << " tracks written to " << c.out << '\n';
        };
    });

    // train --------------------------------------------------------------
    auto* train = app.add_subcommand("train", "Train the trajectory forest on annotated tracks");
    train->add_option("--tracks", c.tracks, "Training track file")->required()->check(CLI::ExistingFile);
    train->add_option("--out", c.out, "Output model file")->required();
    add_window_flags(train, c, false);
    train->add_option("--variant", c.config_variant, "Descriptor variant")->capture_default_str();
    train->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    add_forest_flags(train, c);
    add_threads(train, c);
    train->callback([&] {
        action = [&] {
            const Dataset ds = load_dataset(c.tracks);
            inputs.push_back(c.tracks);
            naop_train_options o;
            naop_train_options_defaults(&o);
            o.variant = c.config_variant.c_str();
            o.h = single_h(c);
            o.levels = single_level(c);
            o.n_trees = c.n_trees;
            o.max_depth = c.max_depth;
            o.features_per_split = c.features_per_split;
            o.min_samples_leaf = c.min_samples_leaf;
            o.bootstrap = !c.no_bootstrap;
            o.seed = c.seed;
            o.threads = c.threads;
            naop_forest* f = nullptr;
            check(naop_train(ds.get(), &o, &f));
            Forest forest(f);
            check(naop_forest_save(forest.get(), c.out.c_str()));
            outputs.push_back(c.out);
            seeds["seed"] = c.seed;
            naop_forest_info info;
            check(naop_forest_info_get(forest.get(), &info));
            std::cout << info.n_trees << " trees, " << info.dim << " features (" << info.variant << ", h=" << info.h
                      << ") written to " << c.out << '\n';
        };
    });

    // predict ------------------------------------------------------------
    auto* predict = app.add_subcommand("predict", "Score tracks or detections frame by frame");
    predict->add_option("--model", c.model, "Model file (required for --method forest)")->check(CLI::ExistingFile);
    predict->add_option("--method", c.method, "forest, center or random")
        ->check(CLI::IsMember({"forest", "center", "random"}))
        ->capture_default_str();
    auto* p_tracks = predict->add_option("--tracks", c.tracks, "Track file scored offline")->check(CLI::ExistingFile);
    auto* p_dets =
        predict->add_option("--detections", c.detections, "Detection CSV tracked and scored online")
            ->check(CLI::ExistingFile);
    p_tracks->excludes(p_dets);
    predict->add_option("--out", c.out, "Output predictions CSV")->required();
    predict->add_option("--h", c.h, "Expected window length (checked against the model)")->expected(1);
    predict->add_option("--variant", c.config_variant, "Expected descriptor variant (checked against the model)");
    predict->add_option("--seed", c.seed, "Seed of the random baseline")->capture_default_str();
    add_tracker_flags(predict, c);
    add_threads(predict, c);
    predict->callback([&] {
        action = [&] {
            if (c.tracks.empty() == c.detections.empty()) usage("predict needs exactly one of --tracks or --detections");
            Forest forest;
            naop_scorer* s = nullptr;
            if (c.method == "forest") {
                if (c.model.empty()) usage("--method forest needs --model");
                naop_forest* f = nullptr;
                check(naop_forest_load(c.model.c_str(), &f));
                forest.reset(f);
                inputs.push_back(c.model);
                naop_forest_info info;
                check(naop_forest_info_get(forest.get(), &info));
                if (predict->count("--h") && info.levels == 0 && single_h(c) != info.h)
                    throw CliError{NAOP_E_MISMATCH, "model window h=" + std::to_string(info.h) + " but --h " +
                                                        std::to_string(single_h(c)) + " was requested"};
                if (predict->count("--variant") && c.config_variant != info.variant)
                    throw CliError{NAOP_E_MISMATCH, std::string("model descriptor is '") + info.variant +
                                                        "' but --variant " + c.config_variant + " was requested"};
                check(naop_scorer_forest(forest.get(), &s));
            } else if (c.method == "center") {
                check(naop_scorer_center(&s));
            } else {
                check(naop_scorer_random(c.seed, &s));
                seeds["seed"] = c.seed;
            }
            Scorer scorer(s);
            naop_predictions* p = nullptr;
            if (!c.tracks.empty()) {
                const Dataset ds = load_dataset(c.tracks);
                inputs.push_back(c.tracks);
                check(naop_predict_offline(scorer.get(), ds.get(), c.threads, &p));
            } else {
                const Detections dets = load_detections(c.detections);
                inputs.push_back(c.detections);
                const auto [w, h] = parse_frame_size(c.frame_size);
                const auto o = tracker_options(c);
                check(naop_predict_online(scorer.get(), dets.get(), &o, w, h, &p));
            }
            Predictions preds(p);
            check(naop_predictions_save(preds.get(), c.out.c_str()));
            outputs.push_back(c.out);
            std::cout << naop_predictions_count(preds.get()) << " predictions written to " << c.out << '\n';
        };
    });

    // track --------------------------------------------------------------
    auto* track = app.add_subcommand("track", "Link detections into tracks");
    track->add_option("--detections", c.detections, "Detection CSV")->required()->check(CLI::ExistingFile);
    track->add_option("--out", c.out, "Output track file (JSON Lines)")->required();
    add_tracker_flags(track, c);
    track->callback([&] {
        action = [&] {
            const Detections dets = load_detections(c.detections);
            inputs.push_back(c.detections);
            const auto [w, h] = parse_frame_size(c.frame_size);
            const auto o = tracker_options(c);
            naop_dataset* d = nullptr;
            check(naop_track_detections(dets.get(), &o, w, h, &d));
            Dataset ds(d);
            check(naop_dataset_save(ds.get(), c.out.c_str()));
            outputs.push_back(c.out);
            std::cout << naop_dataset_track_count(ds.get()) << " tracks written to " << c.out << '\n';
        };
    });

    // eval ---------------------------------------------------------------
    std::string mode = "standard", object_class;
    std::vector<double> thresholds{0.5, 0.8, 0.9};
    std::vector<std::size_t> offsets{0, 15, 30, 45, 60};
    bool detection_style = false, shuffle = false;
    auto* eval = app.add_subcommand("eval", "Evaluate predictions or run a cross-validation protocol");
    eval->add_option("--mode", mode, "standard, lopo, looo, fire-rate or time")
        ->check(CLI::IsMember({"standard", "lopo", "looo", "fire-rate", "time"}))
        ->capture_default_str();
    eval->add_option("--tracks", c.tracks, "Annotated track file")->required()->check(CLI::ExistingFile);
    eval->add_option("--predictions", c.predictions, "Predictions CSV (standard and fire-rate modes)")
        ->check(CLI::ExistingFile);
    eval->add_option("--out", c.out, "Report JSON (a CSV is written next to it)")->required();
    eval->add_option("--method", c.method, "forest, motion, random or center (protocol modes)")
        ->check(CLI::IsMember({"forest", "motion", "random", "center"}))
        ->capture_default_str();
    add_window_flags(eval, c, false);
    eval->add_option("--variant", c.config_variant, "Descriptor variant")->capture_default_str();
    eval->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    eval->add_option("--iou-min", c.iou_min, "IoU needed for a match")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    eval->add_option("--thresholds", thresholds, "Confidence thresholds (fire-rate mode)")
        ->delimiter(',')
        ->capture_default_str();
    eval->add_option("--offsets", offsets, "Frames between window end and activation (time mode)")
        ->delimiter(',')
        ->capture_default_str();
    eval->add_option("--class", object_class, "Single held-out class (looo mode; default: all)");
    eval->add_flag("--detection-style", detection_style, "LOPO over every frame scored as a detection");
    eval->add_flag("--shuffle-labels", shuffle, "Shuffle training labels (sanity check)");
    add_forest_flags(eval, c);
    add_threads(eval, c);
    eval->callback([&] {
        action = [&] {
            const Dataset ds = load_dataset(c.tracks);
            inputs.push_back(c.tracks);
            naop_report* r = nullptr;
            if (mode == "standard" || mode == "fire-rate") {
                if (c.predictions.empty()) usage("--mode " + mode + " needs --predictions");
                naop_predictions* p = nullptr;
                check(naop_predictions_load(c.predictions.c_str(), &p));
                Predictions preds(p);
                inputs.push_back(c.predictions);
                if (mode == "standard")
                    check(naop_eval_predictions(preds.get(), ds.get(), c.iou_min, &r));
                else
                    check(naop_eval_fire_rate(preds.get(), ds.get(), thresholds.data(), thresholds.size(), c.iou_min,
                                              &r));
            } else {
                auto o = eval_options(c);
                o.shuffle_train_labels = shuffle;
                seeds["seed"] = c.seed;
                if (mode == "lopo")
                    check(naop_eval_lopo(ds.get(), &o, detection_style, &r));
                else if (mode == "looo")
                    check(naop_eval_looo(ds.get(), &o, object_class.empty() ? nullptr : object_class.c_str(), &r));
                else
                    check(naop_eval_time(ds.get(), &o, offsets.data(), offsets.size(), &r));
            }
            Report report(r);
            write_report(report.get(), c.out, outputs);
        };
    });

    // sweep --------------------------------------------------------------
    std::string variants = "full,relative,absolute";
    auto* sweep = app.add_subcommand("sweep", "LOPO AP across window lengths, pyramid levels and descriptors");
    sweep->add_option("--tracks", c.tracks, "Annotated track file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", c.out, "Report JSON (a CSV is written next to it)")->required();
    add_window_flags(sweep, c, true);
    sweep->add_option("--variants", variants, "Comma-separated descriptor variants")->capture_default_str();
    sweep->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    add_forest_flags(sweep, c);
    add_threads(sweep, c);
    sweep->callback([&] {
        action = [&] {
            const Dataset ds = load_dataset(c.tracks);
            inputs.push_back(c.tracks);
            Common one = c;
            one.h = {30};
            one.levels.clear();
            auto o = eval_options(one);
            seeds["seed"] = c.seed;
            naop_report* r = nullptr;
            check(naop_sweep(ds.get(), &o, c.h.data(), c.h.size(), c.levels.data(), c.levels.size(), variants.c_str(),
                             &r));
            Report report(r);
            write_report(report.get(), c.out, outputs);
            std::cout << naop_report_csv(report.get());
        };
    });

    // plot ---------------------------------------------------------------
    int width = 640, height = 480;
    auto* plot = app.add_subcommand("plot", "Render the PR curves of a report as SVG (+ CSV)");
    plot->add_option("--report", c.report, "Report JSON from eval")->required()->check(CLI::ExistingFile);
    plot->add_option("--out", c.out, "Output SVG (a CSV of the curves is written next to it)")->required();
    plot->add_option("--width", width, "Image width")->capture_default_str();
    plot->add_option("--height", height, "Image height")->capture_default_str();
    plot->callback([&] {
        action = [&] {
            std::ifstream in(c.report, std::ios::binary);
            if (!in) throw CliError{NAOP_E_IO, "cannot open '" + c.report + "'"};
            std::stringstream text;
            text << in.rdbuf();
            inputs.push_back(c.report);
            char* svg = nullptr;
            char* csv = nullptr;
            check(naop_plot_pr(text.str().c_str(), width, height, &svg, &csv));
            const std::string s(svg), v(csv);
            naop_string_free(svg);
            naop_string_free(csv);
            write_text(c.out, s);
            const std::string csv_path = sibling(c.out, ".csv");
            write_text(csv_path, v);
            outputs.push_back(c.out);
            outputs.push_back(csv_path);
        };
    });

    // replay -------------------------------------------------------------
    std::string manifest_path;
    auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    replay->add_option("--manifest", manifest_path, "Manifest written by an earlier run")
        ->required()
        ->check(CLI::ExistingFile);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (replay->parsed()) {
        std::ifstream in(manifest_path);
        ordered_json m;
        try {
            m = ordered_json::parse(in);
        } catch (const std::exception& e) {
            throw CliError{NAOP_E_PARSE, "bad manifest: " + std::string(e.what())};
        }
        if (!m.contains("argv") || !m["argv"].is_array()) throw CliError{NAOP_E_PARSE, "manifest has no argv"};
        return run(m["argv"].get<std::vector<std::string>>());
    }

    const CLI::App* sub = app.get_subcommands().front();
    const auto t0 = std::chrono::steady_clock::now();
    const std::string started = timestamp();
    action();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    ordered_json manifest;
    manifest["command"] = sub->get_name();
    manifest["argv"] = args;
    manifest["config"] = option_snapshot(sub);
    manifest["seeds"] = seeds;
    manifest["inputs"] = inputs;
    manifest["outputs"] = outputs;
    manifest["version"] = naop_version();
    manifest["started_at"] = started;
    manifest["wall_clock_seconds"] = seconds;
    write_text(c.out + ".manifest.json", manifest.dump(2) + "\n");
    return 0;
}

int run(std::vector<std::string> args) {
    try {
        return dispatch(std::move(args));
    } catch (const CliError& e) {
        std::cerr << "naop: error: " << e.message << '\n';
        return e.code;
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(std::move(args));
}
