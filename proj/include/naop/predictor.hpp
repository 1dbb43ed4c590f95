#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "naop/forest.hpp"
#include "naop/tracker.hpp"
#include "naop/trackstore.hpp"

namespace naop {

struct ScoredPrediction {
    std::string video_id;
    int frame_index = 0;
    std::string object_class;
    PixelBox box;
    double confidence = 0.0;
    std::string source_track_id;

    friend bool operator==(const ScoredPrediction&, const ScoredPrediction&) = default;
};

/// A track observed up to the current frame. `history.back()` is the current box.
struct TrackSnapshot {
    const std::string* track_id = nullptr;
    const std::string* video_id = nullptr;
    const std::string* object_class = nullptr;
    int frame_width = 0;
    int frame_height = 0;
    std::span<const TrackFrame> history;
    double detection_score = 1.0;
};

/// Confidence that the object in a snapshot is about to become active.
/// Returning a negative value means "no prediction for this track".
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual double score(const TrackSnapshot& snapshot) const = 0;
    virtual std::string name() const = 0;
};

/// Sliding-window forest classifier; tracks shorter than the window are skipped.
class ForestScorer : public Scorer {
public:
    explicit ForestScorer(const Forest& forest);
    double score(const TrackSnapshot& snapshot) const override;
    std::string name() const override { return "forest"; }
    std::size_t window() const { return window_; }

private:
    const Forest& forest_;
    std::size_t window_;
};

/// Motion-magnitude threshold baseline over the last h frames.
class MotionScorer : public Scorer {
public:
    MotionScorer(ThresholdModel model, std::size_t h) : model_(model), h_(h) {}
    double score(const TrackSnapshot& snapshot) const override;
    std::string name() const override { return "motion"; }

private:
    ThresholdModel model_;
    std::size_t h_;
};

/// s = s_o * s_c, s_c = 1 - d / d_max with d the normalized center's distance
/// from the frame center and d_max = sqrt(2) / 2.
class CenterBiasScorer : public Scorer {
public:
    double score(const TrackSnapshot& snapshot) const override;
    std::string name() const override { return "center"; }
};

/// Uniform [0, 1] score hashed from (seed, video, frame, track) so the value
/// does not depend on evaluation order.
class RandomScorer : public Scorer {
public:
    explicit RandomScorer(std::uint64_t seed) : seed_(seed) {}
    double score(const TrackSnapshot& snapshot) const override;
    std::string name() const override { return "random"; }

private:
    std::uint64_t seed_;
};

/// Scores every snapshot whose current frame is `frame_index`.
std::vector<ScoredPrediction> predict_frame(std::span<const TrackSnapshot> tracks, int frame_index,
                                            const Scorer& scorer);

/// Sorts by (video_id, frame_index, source_track_id).
void sort_predictions(std::vector<ScoredPrediction>& predictions);

/// Scores every frame of every track of a densified dataset.
std::vector<ScoredPrediction> run_offline(const Dataset& dataset, const Scorer& scorer, int threads = 1);

/// Tracks detections frame by frame and scores the confirmed tracks.
/// Detections must be grouped per video with ascending frame indices.
std::vector<ScoredPrediction> run_online(const std::vector<Detection>& detections, const AssocConfig& config,
                                         const Scorer& scorer, int frame_width, int frame_height);

/// CSV `video_id,frame,class,x1,y1,x2,y2,confidence,track_id`.
void write_predictions(const std::vector<ScoredPrediction>& predictions, std::ostream& out);
std::vector<ScoredPrediction> parse_predictions(std::istream& in);
void save_predictions(const std::vector<ScoredPrediction>& predictions, const std::string& path);
std::vector<ScoredPrediction> load_predictions(const std::string& path);

}  // namespace naop
