#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "naop/descriptors.hpp"
#include "naop/forest.hpp"
#include "naop/predictor.hpp"
#include "naop/trackstore.hpp"
#include "naop/trajectories.hpp"

namespace naop {

// ---------------------------------------------------------------------------
// Detection-style evaluation
// ---------------------------------------------------------------------------

struct GtEntry {
    std::string video_id;
    int frame_index = 0;
    std::string object_class;
    PixelBox box;
    bool valid = false;   // passive frame of a mixed track
    bool active = false;  // active frame of a mixed track
    std::string source_track_id;
};

/// One entry per frame per track. Only passive frames of mixed tracks are valid.
std::vector<GtEntry> build_gt(const Dataset& dataset);
std::size_t count_valid(std::span<const GtEntry> gt);

struct LabeledPrediction {
    double confidence = 0.0;
    bool true_positive = false;
};

/// Greedy per-frame matching in descending confidence (input order breaks
/// ties). A prediction is a true positive iff it claims an unclaimed valid
/// entry of its class with IoU >= iou_min; the highest-IoU candidate is
/// claimed. Output is aligned with `predictions`.
std::vector<LabeledPrediction> match_predictions(std::span<const ScoredPrediction> predictions,
                                                 std::span<const GtEntry> gt, double iou_min = 0.5);

struct PRPoint {
    double precision = 0.0;
    double recall = 0.0;
    double threshold = 0.0;
};

struct EvalCounts {
    std::size_t n_valid_gt = 0;
    std::size_t n_predictions = 0;
    std::size_t tp = 0;
    std::size_t fp = 0;
};

struct EvalReport {
    std::vector<PRPoint> pr;
    double ap = 0.0;
    EvalCounts counts;
    std::string method;
    std::size_t h = 0;
    std::string variant;
    std::string fold;

    double positive_rate() const {
        return counts.n_predictions ? double(counts.n_valid_gt) / double(counts.n_predictions) : 0.0;
    }
};

/// One PR point per distinct confidence (descending) and all-points
/// interpolated AP. Throws when n_valid_gt is zero.
EvalReport pr_and_ap(std::span<const LabeledPrediction> labeled, std::size_t n_valid_gt);

EvalReport evaluate_detections(std::span<const ScoredPrediction> predictions, std::span<const GtEntry> gt,
                               double iou_min = 0.5);

struct FireRateRow {
    double threshold = 0.0;
    double frac_active_fired = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    std::size_t n_active_gt = 0;
    std::size_t n_active_fired = 0;
};

/// Fraction of active-segment boxes overlapped (IoU >= iou_min, same class) by
/// a prediction with confidence >= t, with precision and recall at t.
std::vector<FireRateRow> active_fire_rate(std::span<const ScoredPrediction> predictions, std::span<const GtEntry> gt,
                                          std::span<const double> thresholds, double iou_min = 0.5);

// ---------------------------------------------------------------------------
// Trajectory-classifier protocols
// ---------------------------------------------------------------------------

enum class Method { Forest, Motion, Random, CenterBias };

const char* to_string(Method method);
std::optional<Method> parse_method(std::string_view name);

struct ProtocolConfig {
    Method method = Method::Forest;
    DescriptorVariant variant = DescriptorVariant::Full;
    std::size_t h = 30;
    int levels = 0;  // > 0 selects the temporal-pyramid scheme
    TrainConfig train;
    std::uint64_t seed = 0;
    int threads = 1;
    double iou_min = 0.5;
    bool shuffle_train_labels = false;
};

/// Active trajectories of mixed tracks (one per usable activation point) and one
/// seeded passive trajectory per passive track, in track order.
std::vector<Trajectory> extract_labeled(const Dataset& dataset, const ProtocolConfig& config, std::uint64_t seed,
                                        std::size_t offset = 0);

/// Boxes the descriptor sees: the window itself, or its pyramid encoding.
std::vector<NormBox> encode_for_model(const Trajectory& trajectory, int levels);

/// A trained scorer for one fold.
struct FoldModel {
    Method method = Method::Forest;
    std::optional<Forest> forest;
    ThresholdModel threshold;
    std::uint64_t seed = 0;

    /// Confidence for a labelled trajectory; trajectory_key feeds the random baseline.
    double score(const Trajectory& trajectory, const ProtocolConfig& config, std::uint64_t trajectory_key) const;
    /// Scorer over live/offline tracks for detection-style evaluation.
    std::unique_ptr<Scorer> scorer(const ProtocolConfig& config) const;
};

/// Balances and trains the configured method on `train` (trajectories already extracted).
FoldModel train_method(std::span<const Trajectory> train, const ProtocolConfig& config, std::uint64_t seed);
FoldModel train_method(const Dataset& train, const ProtocolConfig& config, std::uint64_t seed);

/// Treats each test trajectory as one prediction; actives are the ground truth.
EvalReport evaluate_trajectories(const FoldModel& model, std::span<const Trajectory> test,
                                 const ProtocolConfig& config);

struct FoldResult {
    std::string subject;
    std::size_t n_train_tracks = 0;
    std::size_t n_test_tracks = 0;
    EvalReport report;
    bool skipped = false;  // no positives in the held-out fold
};

struct LopoReport {
    std::vector<FoldResult> folds;
    double mean_ap = 0.0;
    double mean_positive_rate = 0.0;
    std::string method;
    std::string variant;
    std::size_t h = 0;
    int levels = 0;
};

using FoldEvaluator = std::function<EvalReport(const Dataset& train, const Dataset& test, std::uint64_t fold_seed)>;

/// Leave-one-person-out driver. Fold seeds derive from `seed` and the subject's
/// position in sorted order; folds run on up to `threads` threads. Folds whose
/// held-out data has no positives are reported as skipped and left out of the mean.
LopoReport lopo(const Dataset& dataset, const FoldEvaluator& evaluate, std::uint64_t seed, int threads);

/// LOPO of the trajectory classifier.
LopoReport lopo_trajectories(const Dataset& dataset, const ProtocolConfig& config);

/// LOPO of the full sliding-window system on ground-truth tracks, scored as detections.
LopoReport lopo_detections(const Dataset& dataset, const ProtocolConfig& config);

struct LoooRow {
    std::string object_class;
    double ap_without = 0.0;
    double ap_with = 0.0;
    std::size_t n_test = 0;
    std::size_t n_active = 0;
};

/// Leave-one-object-out inside LOPO folds: trains with and without the target
/// class, tests on the held-out subject's trajectories of that class, and pools
/// the scores over folds before computing AP.
LoooRow looo(const Dataset& dataset, const std::string& object_class, const ProtocolConfig& config);
std::vector<LoooRow> looo_all(const Dataset& dataset, const ProtocolConfig& config);

struct TimeRow {
    std::size_t offset = 0;
    double ap = 0.0;
    double positive_rate = 0.0;
    std::size_t n_folds = 0;
};

/// AP of one trained model when positives end `offset` frames before activation.
std::vector<TimeRow> time_to_activation(const FoldModel& model, const Dataset& test,
                                        std::span<const std::size_t> offsets, const ProtocolConfig& config,
                                        std::uint64_t seed);

/// Same, averaged over LOPO folds (folds without positives at an offset are skipped).
std::vector<TimeRow> lopo_time_to_activation(const Dataset& dataset, std::span<const std::size_t> offsets,
                                             const ProtocolConfig& config);

struct SweepRow {
    std::string scheme;  // "fixed" or "pyramid"
    std::size_t h = 0;
    int levels = 0;
    std::string variant;
    double mean_ap = 0.0;
    double mean_positive_rate = 0.0;
};

/// LOPO trajectory AP for every (h, variant) and (levels, variant) combination.
std::vector<SweepRow> sweep(const Dataset& dataset, std::span<const std::size_t> hs, std::span<const int> levels,
                            std::span<const DescriptorVariant> variants, const ProtocolConfig& config);

}  // namespace naop
