#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "naop/geometry.hpp"
#include "naop/trackstore.hpp"

namespace naop {

struct Detection {
    std::string video_id;
    int frame_index = 0;
    std::string object_class;
    PixelBox box;
    double score = 1.0;

    friend bool operator==(const Detection&, const Detection&) = default;
};

/// CSV with header `video_id,frame,class,x1,y1,x2,y2,score`.
std::vector<Detection> parse_detections(std::istream& in);
std::vector<Detection> load_detections(const std::string& path);
void write_detections(const std::vector<Detection>& detections, std::ostream& out);
void save_detections(const std::vector<Detection>& detections, const std::string& path);

using StateVector = Eigen::Matrix<double, 7, 1>;
using StateMatrix = Eigen::Matrix<double, 7, 7>;

/// Constant-velocity box state (cx, cy, area, aspect, vcx, vcy, varea) in pixels.
struct KalmanState {
    StateVector mean = StateVector::Zero();
    StateMatrix covariance = StateMatrix::Identity();

    PixelBox box() const;
};

/// Noise settings; defaults follow the common SORT parameterization.
struct KalmanNoise {
    double measurement_pos = 1.0;
    double measurement_shape = 10.0;
    double process_pos = 1.0;
    double process_vel = 0.01;
    double process_area_vel = 1e-4;
    double initial_pos = 10.0;
    double initial_vel = 1e4;
};

Eigen::Vector4d measurement_from_box(const PixelBox& box);
PixelBox box_from_measurement(double cx, double cy, double area, double aspect);

KalmanState kalman_init(const PixelBox& box, const KalmanNoise& noise = {});
KalmanState kalman_predict(const KalmanState& state, const KalmanNoise& noise = {});
KalmanState kalman_update(const KalmanState& state, const PixelBox& measured, const KalmanNoise& noise = {});

struct AssocConfig {
    double iou_threshold = 0.3;
    int max_age = 5;
    int min_hits = 1;
    double det_score_min = 0.8;
    bool class_gated = true;
    KalmanNoise noise;
};

struct LiveTrack {
    std::string track_id;
    std::uint64_t serial = 0;  // creation order within one tracker
    std::string video_id;
    std::string object_class;
    KalmanState state;
    std::vector<TrackFrame> history;  // consecutive frame indices; annotated=false on interpolated gaps
    double last_score = 1.0;
    int hits = 0;
    int age = 0;
    int time_since_update = 0;
};

/// One association step per frame. Matched tracks record the detection box;
/// frames missed before a re-match are filled by linear interpolation so every
/// history covers consecutive frame indices.
class Tracker {
public:
    explicit Tracker(AssocConfig config = {}, std::string id_prefix = "trk");

    /// All detections must share one video and frame index, later than the previous call.
    /// Returns the tracks confirmed at this frame (updated now and hits >= min_hits).
    std::vector<const LiveTrack*> step(const std::vector<Detection>& detections);

    const std::vector<LiveTrack>& live() const { return live_; }
    const std::vector<LiveTrack>& retired() const { return retired_; }
    /// Retires every live track (end of stream).
    void finish();
    int last_frame() const { return last_frame_; }
    /// When false, retired tracks are dropped instead of kept in retired().
    void set_keep_retired(bool keep) { keep_retired_ = keep; }
    const AssocConfig& config() const { return config_; }

private:
    AssocConfig config_;
    std::string id_prefix_;
    std::vector<LiveTrack> live_;
    std::vector<LiveTrack> retired_;
    std::uint64_t next_id_ = 0;
    bool keep_retired_ = true;
    int last_frame_ = -1;
    std::string video_id_;
};

/// Splits detections into per-video lists of per-frame groups. Each video's rows
/// must be contiguous with non-decreasing frame indices.
std::vector<std::pair<std::string, std::vector<std::vector<Detection>>>> group_detections(
    const std::vector<Detection>& detections);

/// Trackstore view of a tracker output (boxes clamped to the frame, all flags passive).
ObjectTrack to_object_track(const LiveTrack& track, int frame_width, int frame_height);

/// Runs the tracker over every video in `detections` (grouped by video in first
/// appearance order, then by frame) and returns the tracks in the trackstore
/// layout with all flags passive and `annotated = false`.
Dataset track_detections(const std::vector<Detection>& detections, const AssocConfig& config, int frame_width,
                         int frame_height);

}  // namespace naop
