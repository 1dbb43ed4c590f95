#include "naop/naop.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "naop/error.hpp"
#include "naop/eval.hpp"
#include "naop/log.hpp"
#include "naop/report.hpp"
#include "naop/synthgen.hpp"

struct naop_dataset {
    naop::Dataset value;
};
struct naop_detections {
    std::vector<naop::Detection> value;
};
struct naop_forest {
    naop::Forest value;
};
struct naop_scorer {
    std::unique_ptr<naop::Scorer> value;
};
struct naop_predictions {
    std::vector<naop::ScoredPrediction> value;
};
struct naop_report {
    std::string json;
    std::string csv;
    double value = std::numeric_limits<double>::quiet_NaN();
};

namespace {

thread_local std::string g_last_error;

naop_status to_status(naop::ErrorCode code) { return static_cast<naop_status>(static_cast<int>(code)); }

template <class F>
naop_status guard(F&& body) {
    try {
        body();
        g_last_error.clear();
        return NAOP_OK;
    } catch (const naop::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const nlohmann::json::exception& e) {
        g_last_error = e.what();
        return NAOP_E_PARSE;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return NAOP_E_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return NAOP_E_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return NAOP_E_INTERNAL;
    }
}

template <class T>
void need(const T* p, const char* name) {
    if (!p) naop::fail(naop::ErrorCode::InvalidArgument, std::string(name) + " must not be NULL");
}

std::vector<std::string> split_list(const char* text) {
    std::vector<std::string> out;
    if (!text) return out;
    std::string cur;
    for (const char* c = text;; ++c) {
        if (*c == ',' || *c == '\0') {
            while (!cur.empty() && cur.back() == ' ') cur.pop_back();
            const auto start = cur.find_first_not_of(' ');
            if (start != std::string::npos) out.push_back(cur.substr(start));
            cur.clear();
            if (*c == '\0') break;
        } else {
            cur += *c;
        }
    }
    return out;
}

naop::DescriptorVariant variant_of(const char* name) {
    if (!name) return naop::DescriptorVariant::Full;
    auto v = naop::parse_variant(name);
    if (!v) naop::fail(naop::ErrorCode::InvalidArgument, std::string("unknown descriptor variant '") + name + "'");
    return *v;
}

naop::AssocConfig assoc_of(const naop_tracker_options* o) {
    naop::AssocConfig c;
    if (!o) return c;
    c.iou_threshold = o->iou_threshold;
    c.max_age = o->max_age;
    c.min_hits = o->min_hits;
    c.det_score_min = o->det_score_min;
    c.class_gated = o->class_gated != 0;
    if (!(c.iou_threshold >= 0 && c.iou_threshold <= 1))
        naop::fail(naop::ErrorCode::InvalidArgument, "iou_threshold must lie in [0, 1]");
    if (c.max_age < 0 || c.min_hits < 1) naop::fail(naop::ErrorCode::InvalidArgument, "max_age >= 0 and min_hits >= 1");
    return c;
}

naop::TrainConfig forest_config(int n_trees, int max_depth, int features_per_split, int min_samples_leaf,
                                int bootstrap, uint64_t seed, int threads) {
    if (n_trees < 1) naop::fail(naop::ErrorCode::InvalidArgument, "n_trees must be >= 1");
    if (max_depth < 0 || features_per_split < 0 || min_samples_leaf < 1)
        naop::fail(naop::ErrorCode::InvalidArgument, "invalid forest hyperparameters");
    naop::TrainConfig c;
    c.n_trees = n_trees;
    c.max_depth = max_depth;
    c.features_per_split = features_per_split;
    c.min_samples_leaf = min_samples_leaf;
    c.bootstrap = bootstrap != 0;
    c.seed = seed;
    c.threads = std::max(threads, 1);
    return c;
}

void check_window(std::size_t h, int levels) {
    if (levels < 0 || levels > 20) naop::fail(naop::ErrorCode::InvalidArgument, "levels must lie in [0, 20]");
    if (levels == 1) naop::fail(naop::ErrorCode::InvalidArgument, "pyramid levels must be >= 2");
    if (levels == 0 && h < 2) naop::fail(naop::ErrorCode::InvalidArgument, "h must be >= 2");
}

naop::ProtocolConfig protocol_of(const naop_eval_options* o) {
    naop_eval_options d;
    naop_eval_options_defaults(&d);
    if (!o) o = &d;
    naop::ProtocolConfig c;
    const char* method = o->method ? o->method : "forest";
    auto m = naop::parse_method(method);
    if (!m) naop::fail(naop::ErrorCode::InvalidArgument, std::string("unknown method '") + method + "'");
    c.method = *m;
    c.variant = variant_of(o->variant);
    check_window(o->h, o->levels);
    c.h = o->h;
    c.levels = o->levels;
    c.train = forest_config(o->n_trees, o->max_depth, o->features_per_split, o->min_samples_leaf, o->bootstrap, o->seed,
                            o->threads);
    c.seed = o->seed;
    c.threads = std::max(o->threads, 1);
    if (!(o->iou_min > 0 && o->iou_min <= 1)) naop::fail(naop::ErrorCode::InvalidArgument, "iou_min must lie in (0, 1]");
    c.iou_min = o->iou_min;
    c.shuffle_train_labels = o->shuffle_train_labels != 0;
    return c;
}

template <class T>
T* adopt(std::unique_ptr<T> p, T** out) {
    *out = p.release();
    return *out;
}

char* dup_string(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

}  // namespace

extern "C" {

const char* naop_version(void) { return "1.0.0"; }

const char* naop_last_error(void) { return g_last_error.c_str(); }

const char* naop_status_name(naop_status status) {
    switch (status) {
        case NAOP_OK: return "ok";
        case NAOP_E_INVALID_ARGUMENT: return "invalid argument";
        case NAOP_E_IO: return "i/o error";
        case NAOP_E_PARSE: return "parse error";
        case NAOP_E_MISMATCH: return "model/data mismatch";
        case NAOP_E_FORMAT: return "bad model file";
        case NAOP_E_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void naop_set_warning_callback(naop_warning_fn fn, void* user) {
    if (!fn) {
        naop::reset_warning_sink();
        return;
    }
    naop::set_warning_sink([fn, user](const std::string& m) { fn(m.c_str(), user); });
}

// ---- tracks ---------------------------------------------------------------

naop_status naop_dataset_load(const char* path, naop_dataset** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        adopt(std::make_unique<naop_dataset>(naop_dataset{naop::load_tracks(path)}), out);
    });
}

naop_status naop_dataset_parse(const char* jsonl, naop_dataset** out) {
    return guard([&] {
        need(jsonl, "jsonl");
        need(out, "out");
        adopt(std::make_unique<naop_dataset>(naop_dataset{naop::parse_tracks_string(jsonl)}), out);
    });
}

naop_status naop_dataset_save(const naop_dataset* dataset, const char* path) {
    return guard([&] {
        need(dataset, "dataset");
        need(path, "path");
        naop::save_tracks(dataset->value, path);
    });
}

size_t naop_dataset_track_count(const naop_dataset* dataset) { return dataset ? dataset->value.tracks.size() : 0; }

size_t naop_dataset_frame_count(const naop_dataset* dataset) {
    if (!dataset) return 0;
    size_t n = 0;
    for (const auto& t : dataset->value.tracks) n += t.frames.size();
    return n;
}

void naop_dataset_free(naop_dataset* dataset) { delete dataset; }

// ---- detections -----------------------------------------------------------

naop_status naop_detections_load(const char* path, naop_detections** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        adopt(std::make_unique<naop_detections>(naop_detections{naop::load_detections(path)}), out);
    });
}

naop_status naop_detections_save(const naop_detections* detections, const char* path) {
    return guard([&] {
        need(detections, "detections");
        need(path, "path");
        naop::save_detections(detections->value, path);
    });
}

size_t naop_detections_count(const naop_detections* detections) { return detections ? detections->value.size() : 0; }

void naop_detections_free(naop_detections* detections) { delete detections; }

// ---- synthetic data -------------------------------------------------------

void naop_scenario_defaults(naop_scenario* s) {
    if (!s) return;
    const naop::ScenarioConfig d;
    s->n_subjects = d.n_subjects;
    s->videos_per_subject = d.videos_per_subject;
    s->tracks_per_video = d.tracks_per_video;
    s->object_classes = nullptr;
    s->frame_rate = d.frame_rate;
    s->frame_width = d.frame_width;
    s->frame_height = d.frame_height;
    s->active_fraction = d.active_fraction;
    s->h_signal = d.h_signal;
    s->center_noise = d.center_noise;
    s->scale_noise = d.scale_noise;
    s->min_passive_prefix = d.min_passive_prefix;
    s->max_passive_prefix = d.max_passive_prefix;
    s->min_active_length = d.min_active_length;
    s->max_active_length = d.max_active_length;
    s->min_passive_length = d.min_passive_length;
    s->max_passive_length = d.max_passive_length;
    s->annotate_every = d.annotate_every;
    s->scale_growth = d.approach.scale_growth;
    s->center_drift = d.approach.center_drift;
    s->growth = d.approach.growth;
    s->pull = d.approach.pull;
    s->seed = d.seed;
}

naop_status naop_generate_dataset(const naop_scenario* s, naop_dataset** out) {
    return guard([&] {
        need(s, "scenario");
        need(out, "out");
        naop::ScenarioConfig c;
        c.n_subjects = s->n_subjects;
        c.videos_per_subject = s->videos_per_subject;
        c.tracks_per_video = s->tracks_per_video;
        if (s->object_classes && *s->object_classes) c.object_classes = split_list(s->object_classes);
        c.frame_rate = s->frame_rate;
        c.frame_width = s->frame_width;
        c.frame_height = s->frame_height;
        c.active_fraction = s->active_fraction;
        c.h_signal = s->h_signal;
        c.center_noise = s->center_noise;
        c.scale_noise = s->scale_noise;
        c.min_passive_prefix = s->min_passive_prefix;
        c.max_passive_prefix = s->max_passive_prefix;
        c.min_active_length = s->min_active_length;
        c.max_active_length = s->max_active_length;
        c.min_passive_length = s->min_passive_length;
        c.max_passive_length = s->max_passive_length;
        c.annotate_every = s->annotate_every;
        c.approach.scale_growth = s->scale_growth != 0;
        c.approach.center_drift = s->center_drift != 0;
        c.approach.growth = s->growth;
        c.approach.pull = s->pull;
        c.seed = s->seed;
        adopt(std::make_unique<naop_dataset>(naop_dataset{naop::gen_dataset(c)}), out);
    });
}

naop_status naop_generate_detections(const naop_dataset* dataset, const naop_detection_noise* noise,
                                     naop_detections** out) {
    return guard([&] {
        need(dataset, "dataset");
        need(noise, "noise");
        need(out, "out");
        naop::DetectionNoise n{noise->sigma_px, noise->fp_rate, noise->fn_rate, noise->seed};
        adopt(std::make_unique<naop_detections>(naop_detections{naop::gen_detections(dataset->value, n)}), out);
    });
}

// ---- tracking -------------------------------------------------------------

void naop_tracker_options_defaults(naop_tracker_options* o) {
    if (!o) return;
    const naop::AssocConfig d;
    o->iou_threshold = d.iou_threshold;
    o->max_age = d.max_age;
    o->min_hits = d.min_hits;
    o->det_score_min = d.det_score_min;
    o->class_gated = d.class_gated;
}

naop_status naop_track_detections(const naop_detections* detections, const naop_tracker_options* options,
                                  int frame_width, int frame_height, naop_dataset** out) {
    return guard([&] {
        need(detections, "detections");
        need(out, "out");
        auto ds = naop::track_detections(detections->value, assoc_of(options), frame_width, frame_height);
        adopt(std::make_unique<naop_dataset>(naop_dataset{std::move(ds)}), out);
    });
}

// ---- forest ---------------------------------------------------------------

void naop_train_options_defaults(naop_train_options* o) {
    if (!o) return;
    const naop::TrainConfig d;
    o->variant = "full";
    o->h = 30;
    o->levels = 0;
    o->n_trees = d.n_trees;
    o->max_depth = d.max_depth;
    o->features_per_split = d.features_per_split;
    o->min_samples_leaf = d.min_samples_leaf;
    o->bootstrap = d.bootstrap;
    o->seed = 0;
    o->threads = 1;
}

naop_status naop_train(const naop_dataset* dataset, const naop_train_options* o, naop_forest** out) {
    return guard([&] {
        need(dataset, "dataset");
        need(o, "options");
        need(out, "out");
        check_window(o->h, o->levels);
        naop::ProtocolConfig c;
        c.method = naop::Method::Forest;
        c.variant = variant_of(o->variant);
        c.h = o->h;
        c.levels = o->levels;
        c.train = forest_config(o->n_trees, o->max_depth, o->features_per_split, o->min_samples_leaf, o->bootstrap,
                                o->seed, o->threads);
        c.seed = o->seed;
        c.threads = std::max(o->threads, 1);
        auto model = naop::train_method(dataset->value, c, o->seed);
        adopt(std::make_unique<naop_forest>(naop_forest{std::move(*model.forest)}), out);
    });
}

naop_status naop_forest_save(const naop_forest* forest, const char* path) {
    return guard([&] {
        need(forest, "forest");
        need(path, "path");
        naop::save_model_file(forest->value, path);
    });
}

naop_status naop_forest_load(const char* path, naop_forest** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        adopt(std::make_unique<naop_forest>(naop_forest{naop::load_model_file(path)}), out);
    });
}

naop_status naop_forest_info_get(const naop_forest* forest, naop_forest_info* out) {
    return guard([&] {
        need(forest, "forest");
        need(out, "out");
        const auto& f = forest->value;
        out->variant = naop::to_string(f.variant);
        out->h = f.h;
        out->levels = static_cast<int>(f.levels);
        out->dim = f.dim;
        out->n_trees = f.trees.size();
        out->seed = f.seed;
    });
}

naop_status naop_forest_predict_proba(const naop_forest* forest, const double* features, size_t n,
                                      double* probabilities) {
    return guard([&] {
        need(forest, "forest");
        if (n == 0) return;
        need(features, "features");
        need(probabilities, "probabilities");
        const std::size_t d = forest->value.dim;
        for (size_t i = 0; i < n; ++i)
            probabilities[i] = forest->value.predict_proba(std::span<const double>(features + i * d, d));
    });
}

void naop_forest_free(naop_forest* forest) { delete forest; }

// ---- scoring --------------------------------------------------------------

naop_status naop_scorer_forest(const naop_forest* forest, naop_scorer** out) {
    return guard([&] {
        need(forest, "forest");
        need(out, "out");
        adopt(std::make_unique<naop_scorer>(naop_scorer{std::make_unique<naop::ForestScorer>(forest->value)}), out);
    });
}

naop_status naop_scorer_motion(double threshold, size_t h, naop_scorer** out) {
    return guard([&] {
        need(out, "out");
        if (h < 2) naop::fail(naop::ErrorCode::InvalidArgument, "h must be >= 2");
        naop::ThresholdModel m;
        m.threshold = threshold;
        adopt(std::make_unique<naop_scorer>(naop_scorer{std::make_unique<naop::MotionScorer>(m, h)}), out);
    });
}

naop_status naop_scorer_center(naop_scorer** out) {
    return guard([&] {
        need(out, "out");
        adopt(std::make_unique<naop_scorer>(naop_scorer{std::make_unique<naop::CenterBiasScorer>()}), out);
    });
}

naop_status naop_scorer_random(uint64_t seed, naop_scorer** out) {
    return guard([&] {
        need(out, "out");
        adopt(std::make_unique<naop_scorer>(naop_scorer{std::make_unique<naop::RandomScorer>(seed)}), out);
    });
}

void naop_scorer_free(naop_scorer* scorer) { delete scorer; }

naop_status naop_train_motion(const naop_dataset* dataset, size_t h, uint64_t seed, double* threshold) {
    return guard([&] {
        need(dataset, "dataset");
        need(threshold, "threshold");
        if (h < 2) naop::fail(naop::ErrorCode::InvalidArgument, "h must be >= 2");
        naop::ProtocolConfig c;
        c.method = naop::Method::Motion;
        c.h = h;
        c.seed = seed;
        *threshold = naop::train_method(dataset->value, c, seed).threshold.threshold;
    });
}

naop_status naop_predict_offline(const naop_scorer* scorer, const naop_dataset* dataset, int threads,
                                 naop_predictions** out) {
    return guard([&] {
        need(scorer, "scorer");
        need(dataset, "dataset");
        need(out, "out");
        auto preds = naop::run_offline(naop::densify(dataset->value), *scorer->value, std::max(threads, 1));
        adopt(std::make_unique<naop_predictions>(naop_predictions{std::move(preds)}), out);
    });
}

naop_status naop_predict_online(const naop_scorer* scorer, const naop_detections* detections,
                                const naop_tracker_options* options, int frame_width, int frame_height,
                                naop_predictions** out) {
    return guard([&] {
        need(scorer, "scorer");
        need(detections, "detections");
        need(out, "out");
        auto preds =
            naop::run_online(detections->value, assoc_of(options), *scorer->value, frame_width, frame_height);
        adopt(std::make_unique<naop_predictions>(naop_predictions{std::move(preds)}), out);
    });
}

naop_status naop_predictions_load(const char* path, naop_predictions** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        adopt(std::make_unique<naop_predictions>(naop_predictions{naop::load_predictions(path)}), out);
    });
}

naop_status naop_predictions_save(const naop_predictions* predictions, const char* path) {
    return guard([&] {
        need(predictions, "predictions");
        need(path, "path");
        naop::save_predictions(predictions->value, path);
    });
}

size_t naop_predictions_count(const naop_predictions* predictions) {
    return predictions ? predictions->value.size() : 0;
}

naop_status naop_predictions_get(const naop_predictions* predictions, size_t index, naop_prediction_view* out) {
    return guard([&] {
        need(predictions, "predictions");
        need(out, "out");
        if (index >= predictions->value.size()) naop::fail(naop::ErrorCode::InvalidArgument, "index out of range");
        const auto& p = predictions->value[index];
        *out = {p.video_id.c_str(), p.frame_index, p.object_class.c_str(), p.box.x1, p.box.y1, p.box.x2, p.box.y2,
                p.confidence, p.source_track_id.c_str()};
    });
}

void naop_predictions_free(naop_predictions* predictions) { delete predictions; }

// ---- evaluation -----------------------------------------------------------

void naop_eval_options_defaults(naop_eval_options* o) {
    if (!o) return;
    const naop::TrainConfig d;
    o->method = "forest";
    o->variant = "full";
    o->h = 30;
    o->levels = 0;
    o->n_trees = d.n_trees;
    o->max_depth = d.max_depth;
    o->features_per_split = d.features_per_split;
    o->min_samples_leaf = d.min_samples_leaf;
    o->bootstrap = d.bootstrap;
    o->seed = 0;
    o->threads = 1;
    o->iou_min = 0.5;
    o->shuffle_train_labels = 0;
}

naop_status naop_eval_predictions(const naop_predictions* predictions, const naop_dataset* ground_truth,
                                  double iou_min, naop_report** out) {
    return guard([&] {
        need(predictions, "predictions");
        need(ground_truth, "ground_truth");
        need(out, "out");
        const auto gt = naop::build_gt(naop::densify(ground_truth->value));
        auto r = naop::evaluate_detections(predictions->value, gt, iou_min);
        r.method = "predictions";
        auto rep = std::make_unique<naop_report>();
        rep->json = naop::to_json(r).dump(2);
        rep->csv = naop::pr_csv(r);
        rep->value = r.ap;
        adopt(std::move(rep), out);
    });
}

naop_status naop_eval_fire_rate(const naop_predictions* predictions, const naop_dataset* ground_truth,
                                const double* thresholds, size_t n_thresholds, double iou_min, naop_report** out) {
    return guard([&] {
        need(predictions, "predictions");
        need(ground_truth, "ground_truth");
        need(out, "out");
        if (n_thresholds == 0) naop::fail(naop::ErrorCode::InvalidArgument, "at least one threshold is required");
        need(thresholds, "thresholds");
        const auto gt = naop::build_gt(naop::densify(ground_truth->value));
        const auto rows = naop::active_fire_rate(predictions->value, gt,
                                                 std::span<const double>(thresholds, n_thresholds), iou_min);
        auto rep = std::make_unique<naop_report>();
        rep->json = nlohmann::json{{"mode", "fire-rate"}, {"rows", naop::to_json(rows)}}.dump(2);
        rep->csv = naop::fire_rate_csv(rows);
        adopt(std::move(rep), out);
    });
}

naop_status naop_eval_lopo(const naop_dataset* dataset, const naop_eval_options* options, int detection_style,
                           naop_report** out) {
    return guard([&] {
        need(dataset, "dataset");
        need(out, "out");
        const auto c = protocol_of(options);
        const auto r = detection_style ? naop::lopo_detections(dataset->value, c)
                                       : naop::lopo_trajectories(dataset->value, c);
        auto doc = naop::to_json(r);
        doc["mode"] = detection_style ? "lopo-detections" : "lopo";
        auto rep = std::make_unique<naop_report>();
        rep->json = doc.dump(2);
        rep->csv = naop::folds_csv(r);
        rep->value = r.mean_ap;
        adopt(std::move(rep), out);
    });
}

naop_status naop_eval_looo(const naop_dataset* dataset, const naop_eval_options* options, const char* object_class,
                           naop_report** out) {
    return guard([&] {
        need(dataset, "dataset");
        need(out, "out");
        const auto c = protocol_of(options);
        std::vector<naop::LoooRow> rows;
        if (object_class)
            rows.push_back(naop::looo(dataset->value, object_class, c));
        else
            rows = naop::looo_all(dataset->value, c);
        auto rep = std::make_unique<naop_report>();
        rep->json = nlohmann::json{{"mode", "looo"}, {"rows", naop::to_json(rows)}}.dump(2);
        rep->csv = naop::looo_csv(rows);
        adopt(std::move(rep), out);
    });
}

naop_status naop_eval_time(const naop_dataset* dataset, const naop_eval_options* options, const size_t* offsets,
                           size_t n_offsets, naop_report** out) {
    return guard([&] {
        need(dataset, "dataset");
        need(out, "out");
        if (n_offsets == 0) naop::fail(naop::ErrorCode::InvalidArgument, "at least one offset is required");
        need(offsets, "offsets");
        const auto c = protocol_of(options);
        const auto rows =
            naop::lopo_time_to_activation(dataset->value, std::span<const std::size_t>(offsets, n_offsets), c);
        auto rep = std::make_unique<naop_report>();
        rep->json = nlohmann::json{{"mode", "time"}, {"rows", naop::to_json(rows)}}.dump(2);
        rep->csv = naop::time_csv(rows);
        adopt(std::move(rep), out);
    });
}

naop_status naop_sweep(const naop_dataset* dataset, const naop_eval_options* options, const size_t* hs, size_t n_hs,
                       const int* levels, size_t n_levels, const char* variants, naop_report** out) {
    return guard([&] {
        need(dataset, "dataset");
        need(out, "out");
        if (n_hs > 0) need(hs, "hs");
        if (n_levels > 0) need(levels, "levels");
        if (n_hs + n_levels == 0) naop::fail(naop::ErrorCode::InvalidArgument, "sweep needs at least one h or level");
        for (size_t i = 0; i < n_hs; ++i) check_window(hs[i], 0);
        std::vector<naop::DescriptorVariant> vs;
        for (const auto& name : split_list(variants)) vs.push_back(variant_of(name.c_str()));
        if (vs.empty()) naop::fail(naop::ErrorCode::InvalidArgument, "sweep needs at least one variant");
        const auto rows = naop::sweep(dataset->value, std::span<const std::size_t>(hs, n_hs),
                                      std::span<const int>(levels, n_levels), vs, protocol_of(options));
        auto rep = std::make_unique<naop_report>();
        rep->json = nlohmann::json{{"mode", "sweep"}, {"rows", naop::to_json(rows)}}.dump(2);
        rep->csv = naop::sweep_csv(rows);
        adopt(std::move(rep), out);
    });
}

const char* naop_report_json(const naop_report* report) { return report ? report->json.c_str() : ""; }

const char* naop_report_csv(const naop_report* report) { return report ? report->csv.c_str() : ""; }

double naop_report_value(const naop_report* report) {
    return report ? report->value : std::numeric_limits<double>::quiet_NaN();
}

void naop_report_free(naop_report* report) { delete report; }

// ---- plotting -------------------------------------------------------------

naop_status naop_plot_pr(const char* report_json, int width, int height, char** svg, char** csv) {
    return guard([&] {
        need(report_json, "report_json");
        need(svg, "svg");
        need(csv, "csv");
        *svg = nullptr;
        *csv = nullptr;
        const auto doc = nlohmann::json::parse(report_json);
        const auto curves = naop::curves_from_json(doc);
        const std::string s = naop::render_pr_svg(curves, width, height);
        const std::string c = naop::curves_csv(curves);
        char* s_out = dup_string(s);
        try {
            *csv = dup_string(c);
        } catch (...) {
            std::free(s_out);
            throw;
        }
        *svg = s_out;
    });
}

void naop_string_free(char* s) { std::free(s); }

}  // extern "C"
