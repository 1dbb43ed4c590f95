/* C interface to the next-active-object prediction library.
 *
 * Every function returning naop_status leaves a message for naop_last_error()
 * (thread-local) when it fails. Objects returned through out-pointers belong to
 * the caller and are released with the matching *_free function. Strings
 * returned by accessors live as long as the object they came from, except for
 * those documented as caller-owned (release with naop_string_free).
 */
#ifndef NAOP_NAOP_H
#define NAOP_NAOP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(NAOP_BUILDING)
#define NAOP_API __attribute__((visibility("default")))
#else
#define NAOP_API
#endif

typedef enum naop_status {
    NAOP_OK = 0,
    NAOP_E_INVALID_ARGUMENT = 1,
    NAOP_E_IO = 2,
    NAOP_E_PARSE = 3,
    NAOP_E_MISMATCH = 4, /* model and data disagree (descriptor, window length) */
    NAOP_E_FORMAT = 5,   /* corrupt or incompatible model file */
    NAOP_E_INTERNAL = 6
} naop_status;

typedef struct naop_dataset naop_dataset;
typedef struct naop_detections naop_detections;
typedef struct naop_forest naop_forest;
typedef struct naop_scorer naop_scorer;
typedef struct naop_predictions naop_predictions;
typedef struct naop_report naop_report;

NAOP_API const char* naop_version(void);
NAOP_API const char* naop_last_error(void);
NAOP_API const char* naop_status_name(naop_status status);

/* Warnings (e.g. fewer passive samples than active ones) go to stderr unless a
 * callback is installed. Passing NULL restores stderr. */
typedef void (*naop_warning_fn)(const char* message, void* user);
NAOP_API void naop_set_warning_callback(naop_warning_fn fn, void* user);

/* ---- tracks ------------------------------------------------------------ */

NAOP_API naop_status naop_dataset_load(const char* path, naop_dataset** out);
NAOP_API naop_status naop_dataset_parse(const char* jsonl, naop_dataset** out);
NAOP_API naop_status naop_dataset_save(const naop_dataset* dataset, const char* path);
NAOP_API size_t naop_dataset_track_count(const naop_dataset* dataset);
NAOP_API size_t naop_dataset_frame_count(const naop_dataset* dataset);
NAOP_API void naop_dataset_free(naop_dataset* dataset);

/* ---- detections -------------------------------------------------------- */

NAOP_API naop_status naop_detections_load(const char* path, naop_detections** out);
NAOP_API naop_status naop_detections_save(const naop_detections* detections, const char* path);
NAOP_API size_t naop_detections_count(const naop_detections* detections);
NAOP_API void naop_detections_free(naop_detections* detections);

/* ---- synthetic data ---------------------------------------------------- */

typedef struct naop_scenario {
    int n_subjects;
    int videos_per_subject;
    int tracks_per_video;
    const char* object_classes; /* comma-separated; NULL or "" keeps the defaults */
    double frame_rate;
    int frame_width;
    int frame_height;
    double active_fraction;
    int h_signal;
    double center_noise;
    double scale_noise;
    int min_passive_prefix;
    int max_passive_prefix;
    int min_active_length;
    int max_active_length;
    int min_passive_length;
    int max_passive_length;
    int annotate_every;
    int scale_growth; /* bool */
    int center_drift; /* bool */
    double growth;
    double pull;
    uint64_t seed;
} naop_scenario;

NAOP_API void naop_scenario_defaults(naop_scenario* scenario);
NAOP_API naop_status naop_generate_dataset(const naop_scenario* scenario, naop_dataset** out);

typedef struct naop_detection_noise {
    double sigma_px;
    double fp_rate;
    double fn_rate;
    uint64_t seed;
} naop_detection_noise;

NAOP_API naop_status naop_generate_detections(const naop_dataset* dataset, const naop_detection_noise* noise,
                                              naop_detections** out);

/* ---- tracking ---------------------------------------------------------- */

typedef struct naop_tracker_options {
    double iou_threshold;
    int max_age;
    int min_hits;
    double det_score_min;
    int class_gated; /* bool */
} naop_tracker_options;

NAOP_API void naop_tracker_options_defaults(naop_tracker_options* options);

/* Links detections into tracks. Output tracks carry passive flags and an empty subject. */
NAOP_API naop_status naop_track_detections(const naop_detections* detections, const naop_tracker_options* options,
                                           int frame_width, int frame_height, naop_dataset** out);

/* ---- forest ------------------------------------------------------------ */

typedef struct naop_train_options {
    const char* variant; /* full, relative, absolute, absolute-diff, absolute-scale */
    size_t h;
    int levels; /* > 0 trains on temporal-pyramid prefixes */
    int n_trees;
    int max_depth; /* 0 = unbounded */
    int features_per_split; /* 0 = ceil(sqrt(dim)) */
    int min_samples_leaf;
    int bootstrap; /* bool */
    uint64_t seed;
    int threads;
} naop_train_options;

typedef struct naop_forest_info {
    const char* variant;
    size_t h;
    int levels;
    size_t dim;
    size_t n_trees;
    uint64_t seed;
} naop_forest_info;

NAOP_API void naop_train_options_defaults(naop_train_options* options);
/* Extracts labelled trajectories, balances them and trains. */
NAOP_API naop_status naop_train(const naop_dataset* dataset, const naop_train_options* options, naop_forest** out);
NAOP_API naop_status naop_forest_save(const naop_forest* forest, const char* path);
NAOP_API naop_status naop_forest_load(const char* path, naop_forest** out);
NAOP_API naop_status naop_forest_info_get(const naop_forest* forest, naop_forest_info* out);
/* features: n rows of info.dim values; probabilities: n outputs. */
NAOP_API naop_status naop_forest_predict_proba(const naop_forest* forest, const double* features, size_t n,
                                               double* probabilities);
NAOP_API void naop_forest_free(naop_forest* forest);

/* ---- scoring ----------------------------------------------------------- */

/* The forest must outlive the scorer. */
NAOP_API naop_status naop_scorer_forest(const naop_forest* forest, naop_scorer** out);
NAOP_API naop_status naop_scorer_motion(double threshold, size_t h, naop_scorer** out);
NAOP_API naop_status naop_scorer_center(naop_scorer** out);
NAOP_API naop_status naop_scorer_random(uint64_t seed, naop_scorer** out);
NAOP_API void naop_scorer_free(naop_scorer* scorer);

/* Fits the motion-magnitude threshold on a training dataset. */
NAOP_API naop_status naop_train_motion(const naop_dataset* dataset, size_t h, uint64_t seed, double* threshold);

typedef struct naop_prediction_view {
    const char* video_id;
    int frame_index;
    const char* object_class;
    double x1, y1, x2, y2;
    double confidence;
    const char* track_id;
} naop_prediction_view;

/* Scores every frame of every track (tracks are densified first). */
NAOP_API naop_status naop_predict_offline(const naop_scorer* scorer, const naop_dataset* dataset, int threads,
                                          naop_predictions** out);
/* Runs the tracker over detections and scores confirmed tracks frame by frame. */
NAOP_API naop_status naop_predict_online(const naop_scorer* scorer, const naop_detections* detections,
                                         const naop_tracker_options* options, int frame_width, int frame_height,
                                         naop_predictions** out);
NAOP_API naop_status naop_predictions_load(const char* path, naop_predictions** out);
NAOP_API naop_status naop_predictions_save(const naop_predictions* predictions, const char* path);
NAOP_API size_t naop_predictions_count(const naop_predictions* predictions);
NAOP_API naop_status naop_predictions_get(const naop_predictions* predictions, size_t index,
                                          naop_prediction_view* out);
NAOP_API void naop_predictions_free(naop_predictions* predictions);

/* ---- evaluation -------------------------------------------------------- */

typedef struct naop_eval_options {
    const char* method;  /* forest, motion, random, center */
    const char* variant;
    size_t h;
    int levels;
    int n_trees;
    int max_depth;
    int features_per_split;
    int min_samples_leaf;
    int bootstrap;
    uint64_t seed;
    int threads;
    double iou_min;
    int shuffle_train_labels; /* bool */
} naop_eval_options;

NAOP_API void naop_eval_options_defaults(naop_eval_options* options);

/* Predictions against the passive frames of mixed tracks in `ground_truth`. */
NAOP_API naop_status naop_eval_predictions(const naop_predictions* predictions, const naop_dataset* ground_truth,
                                           double iou_min, naop_report** out);
NAOP_API naop_status naop_eval_fire_rate(const naop_predictions* predictions, const naop_dataset* ground_truth,
                                         const double* thresholds, size_t n_thresholds, double iou_min,
                                         naop_report** out);
/* Leave-one-person-out. detection_style = 0 scores trajectories, 1 scores every frame as a detection. */
NAOP_API naop_status naop_eval_lopo(const naop_dataset* dataset, const naop_eval_options* options,
                                    int detection_style, naop_report** out);
/* object_class = NULL evaluates every class with active samples. */
NAOP_API naop_status naop_eval_looo(const naop_dataset* dataset, const naop_eval_options* options,
                                    const char* object_class, naop_report** out);
NAOP_API naop_status naop_eval_time(const naop_dataset* dataset, const naop_eval_options* options,
                                    const size_t* offsets, size_t n_offsets, naop_report** out);
/* variants: comma-separated descriptor names. */
NAOP_API naop_status naop_sweep(const naop_dataset* dataset, const naop_eval_options* options, const size_t* hs,
                                size_t n_hs, const int* levels, size_t n_levels, const char* variants,
                                naop_report** out);

NAOP_API const char* naop_report_json(const naop_report* report);
NAOP_API const char* naop_report_csv(const naop_report* report);
/* Headline number: AP (standard), mean AP (lopo), or NaN for tabular reports. */
NAOP_API double naop_report_value(const naop_report* report);
NAOP_API void naop_report_free(naop_report* report);

/* ---- plotting ---------------------------------------------------------- */

/* Renders every PR curve found in a report JSON document. Outputs are caller-owned. */
NAOP_API naop_status naop_plot_pr(const char* report_json, int width, int height, char** svg, char** csv);
NAOP_API void naop_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
