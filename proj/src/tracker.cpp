#include "naop/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "naop/assignment.hpp"
#include "naop/csv.hpp"
#include "naop/error.hpp"

namespace naop {

// ---------------------------------------------------------------------------
// Detections file
// ---------------------------------------------------------------------------

std::vector<Detection> parse_detections(std::istream& in) {
    CsvReader csv(in, {"video_id", "frame", "class", "x1", "y1", "x2", "y2", "score"}, "detections");
    std::vector<Detection> out;
    std::vector<std::string> row;
    while (csv.next(row)) {
        Detection d;
        d.video_id = row[0];
        d.frame_index = csv.to_int(row[1]);
        d.object_class = row[2];
        d.box = {csv.to_double(row[3]), csv.to_double(row[4]), csv.to_double(row[5]), csv.to_double(row[6])};
        d.score = csv.to_double(row[7]);
        if (!d.box.valid()) csv.error("invalid box (need x1<x2, y1<y2)");
        if (!(d.score >= 0.0 && d.score <= 1.0)) csv.error("score outside [0, 1]");
        if (d.frame_index < 0) csv.error("negative frame index");
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<Detection> load_detections(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open detections file '" + path + "'");
    return parse_detections(in);
}

void write_detections(const std::vector<Detection>& detections, std::ostream& out) {
    out << "video_id,frame,class,x1,y1,x2,y2,score\n";
    for (const auto& d : detections)
        out << csv_field(d.video_id) << ',' << d.frame_index << ',' << csv_field(d.object_class) << ','
            << fmt_double(d.box.x1) << ',' << fmt_double(d.box.y1) << ',' << fmt_double(d.box.x2) << ','
            << fmt_double(d.box.y2) << ',' << fmt_double(d.score) << '\n';
}

void save_detections(const std::vector<Detection>& detections, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write detections file '" + path + "'");
    write_detections(detections, out);
}

// ---------------------------------------------------------------------------
// Kalman filter
// ---------------------------------------------------------------------------

namespace {

using Matrix47 = Eigen::Matrix<double, 4, 7>;

StateMatrix transition() {
    StateMatrix f = StateMatrix::Identity();
    f(0, 4) = f(1, 5) = f(2, 6) = 1.0;
    return f;
}

Matrix47 observation() {
    Matrix47 h = Matrix47::Zero();
    h.leftCols<4>().setIdentity();
    return h;
}

StateMatrix process_noise(const KalmanNoise& n) {
    StateVector d;
    d << n.process_pos, n.process_pos, n.process_pos, n.process_pos, n.process_vel, n.process_vel, n.process_area_vel;
    return d.asDiagonal();
}

Eigen::Matrix4d measurement_noise(const KalmanNoise& n) {
    Eigen::Vector4d d(n.measurement_pos, n.measurement_pos, n.measurement_shape, n.measurement_shape);
    return d.asDiagonal();
}

// Symmetrize; if the result is not PSD, clamp negative eigenvalues to zero.
void stabilize(StateMatrix& p) {
    p = 0.5 * (p + p.transpose()).eval();
    Eigen::LDLT<StateMatrix> ldlt(p);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() >= 0).all()) return;
    Eigen::SelfAdjointEigenSolver<StateMatrix> es(p);
    StateVector ev = es.eigenvalues().cwiseMax(0.0);
    p = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    p = 0.5 * (p + p.transpose()).eval();
}

}  // namespace

Eigen::Vector4d measurement_from_box(const PixelBox& box) {
    const double w = box.width(), h = box.height();
    return {box.x1 + 0.5 * w, box.y1 + 0.5 * h, w * h, w / h};
}

PixelBox box_from_measurement(double cx, double cy, double area, double aspect) {
    area = std::max(area, 1e-6);
    aspect = std::max(aspect, 1e-6);
    const double w = std::sqrt(area * aspect);
    const double h = area / w;
    return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

PixelBox KalmanState::box() const { return box_from_measurement(mean(0), mean(1), mean(2), mean(3)); }

KalmanState kalman_init(const PixelBox& box, const KalmanNoise& noise) {
    KalmanState s;
    s.mean.setZero();
    s.mean.head<4>() = measurement_from_box(box);
    StateVector d;
    d << noise.initial_pos, noise.initial_pos, noise.initial_pos, noise.initial_pos, noise.initial_vel,
        noise.initial_vel, noise.initial_vel;
    s.covariance = d.asDiagonal();
    return s;
}

KalmanState kalman_predict(const KalmanState& state, const KalmanNoise& noise) {
    KalmanState s = state;
    if (s.mean(2) + s.mean(6) <= 0) s.mean(6) = 0.0;
    static const StateMatrix f = transition();
    s.mean = f * s.mean;
    s.covariance = f * s.covariance * f.transpose() + process_noise(noise);
    stabilize(s.covariance);
    return s;
}

KalmanState kalman_update(const KalmanState& state, const PixelBox& measured, const KalmanNoise& noise) {
    if (!measured.valid()) fail(ErrorCode::InvalidArgument, "kalman_update: invalid measurement box");
    static const Matrix47 h = observation();
    const Eigen::Matrix4d r = measurement_noise(noise);
    KalmanState s = state;
    const Eigen::Vector4d y = measurement_from_box(measured) - h * s.mean;
    const Eigen::Matrix4d innovation = h * s.covariance * h.transpose() + r;
    const Eigen::Matrix<double, 7, 4> pht = s.covariance * h.transpose();
    // K = P H^T S^-1, solved as S K^T = H P.
    const Eigen::Matrix<double, 7, 4> k = innovation.ldlt().solve(pht.transpose()).transpose();
    s.mean += k * y;
    const StateMatrix ikh = StateMatrix::Identity() - k * h;
    s.covariance = ikh * s.covariance * ikh.transpose() + k * r * k.transpose();
    stabilize(s.covariance);
    return s;
}

// ---------------------------------------------------------------------------
// Tracker
// ---------------------------------------------------------------------------

Tracker::Tracker(AssocConfig config, std::string id_prefix) : config_(config), id_prefix_(std::move(id_prefix)) {
    if (!(config_.iou_threshold >= 0.0 && config_.iou_threshold <= 1.0))
        fail(ErrorCode::InvalidArgument, "iou_threshold must be in [0, 1]");
    if (config_.max_age < 0) fail(ErrorCode::InvalidArgument, "max_age must be >= 0");
    if (config_.min_hits < 1) fail(ErrorCode::InvalidArgument, "min_hits must be >= 1");
    if (!(config_.det_score_min >= 0.0 && config_.det_score_min <= 1.0))
        fail(ErrorCode::InvalidArgument, "det_score_min must be in [0, 1]");
}

std::vector<const LiveTrack*> Tracker::step(const std::vector<Detection>& detections) {
    if (detections.empty()) {
        // Empty frame: the caller still advances time by one frame.
        ++last_frame_;
    } else {
        const int frame = detections.front().frame_index;
        for (const auto& d : detections) {
            if (d.frame_index != frame) fail(ErrorCode::InvalidArgument, "detections span several frames");
            if (d.video_id != detections.front().video_id)
                fail(ErrorCode::InvalidArgument, "detections span several videos");
        }
        if (!video_id_.empty() && detections.front().video_id != video_id_)
            fail(ErrorCode::InvalidArgument, "tracker instance is bound to video '" + video_id_ + "'");
        if (frame <= last_frame_)
            fail(ErrorCode::InvalidArgument, "frame " + std::to_string(frame) + " is not after frame " +
                                                 std::to_string(last_frame_));
        video_id_ = detections.front().video_id;
        last_frame_ = frame;
    }
    const int frame = last_frame_;

    std::vector<const Detection*> dets;
    for (const auto& d : detections)
        if (d.score >= config_.det_score_min) dets.push_back(&d);

    for (auto& t : live_) {
        // Frames skipped since the previous call age the track as well.
        const int elapsed = frame - (t.history.back().frame_index + t.time_since_update);
        for (int k = 0; k < std::max(elapsed, 1); ++k) {
            t.state = kalman_predict(t.state, config_.noise);
            ++t.age;
            ++t.time_since_update;
        }
    }

    std::vector<int> det_to_track(dets.size(), -1);
    if (!live_.empty() && !dets.empty()) {
        constexpr double gated = 1e6;
        CostMatrix cost(live_.size(), dets.size());
        std::vector<PixelBox> predicted(live_.size());
        for (std::size_t i = 0; i < live_.size(); ++i) predicted[i] = live_[i].state.box();
        for (std::size_t i = 0; i < live_.size(); ++i)
            for (std::size_t j = 0; j < dets.size(); ++j) {
                const bool blocked = config_.class_gated && live_[i].object_class != dets[j]->object_class;
                cost(i, j) = blocked ? gated : 1.0 - iou(predicted[i], dets[j]->box);
            }
        const Assignment a = solve_assignment(cost);
        for (std::size_t i = 0; i < live_.size(); ++i) {
            const int j = a.row_to_col[i];
            if (j < 0) continue;
            const auto& d = *dets[static_cast<std::size_t>(j)];
            if (config_.class_gated && live_[i].object_class != d.object_class) continue;
            if (iou(predicted[i], d.box) < config_.iou_threshold) continue;
            det_to_track[static_cast<std::size_t>(j)] = static_cast<int>(i);
        }
    }

    for (std::size_t j = 0; j < dets.size(); ++j) {
        const auto& d = *dets[j];
        if (det_to_track[j] >= 0) {
            auto& t = live_[static_cast<std::size_t>(det_to_track[j])];
            t.state = kalman_update(t.state, d.box, config_.noise);
            const int last_frame = t.history.back().frame_index;
            const PixelBox last_box = t.history.back().box;
            const int gap = frame - last_frame;
            for (int k = 1; k < gap; ++k) {
                const double s = static_cast<double>(k) / gap;
                const PixelBox b{last_box.x1 + s * (d.box.x1 - last_box.x1), last_box.y1 + s * (d.box.y1 - last_box.y1),
                                 last_box.x2 + s * (d.box.x2 - last_box.x2), last_box.y2 + s * (d.box.y2 - last_box.y2)};
                t.history.push_back({last_frame + k, b, false, false});
            }
            t.history.push_back({frame, d.box, false, true});
            t.last_score = d.score;
            ++t.hits;
            t.time_since_update = 0;
        } else {
            LiveTrack t;
            t.serial = next_id_++;
            t.track_id = id_prefix_ + std::to_string(t.serial);
            t.video_id = d.video_id;
            t.object_class = d.object_class;
            t.state = kalman_init(d.box, config_.noise);
            t.history.push_back({frame, d.box, false, true});
            t.last_score = d.score;
            t.hits = 1;
            live_.push_back(std::move(t));
        }
    }

    for (auto it = live_.begin(); it != live_.end();) {
        if (it->time_since_update > config_.max_age) {
            if (keep_retired_) retired_.push_back(std::move(*it));
            it = live_.erase(it);
        } else {
            ++it;
        }
    }

    std::vector<const LiveTrack*> confirmed;
    for (const auto& t : live_)
        if (t.time_since_update == 0 && t.hits >= config_.min_hits) confirmed.push_back(&t);
    return confirmed;
}

void Tracker::finish() {
    if (keep_retired_)
        for (auto& t : live_) retired_.push_back(std::move(t));
    live_.clear();
}

// ---------------------------------------------------------------------------
// Batch tracking
// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, std::vector<std::vector<Detection>>>> group_detections(
    const std::vector<Detection>& detections) {
    std::vector<std::pair<std::string, std::vector<std::vector<Detection>>>> videos;
    std::map<std::string, std::size_t> index;
    for (const auto& d : detections) {
        auto [it, inserted] = index.try_emplace(d.video_id, videos.size());
        if (inserted) {
            videos.push_back({d.video_id, {}});
        } else if (it->second + 1 != videos.size()) {
            fail(ErrorCode::InvalidArgument, "detections of video '" + d.video_id + "' are not contiguous");
        }
        auto& frames = videos[it->second].second;
        if (!frames.empty() && frames.back().front().frame_index == d.frame_index) {
            frames.back().push_back(d);
        } else {
            if (!frames.empty() && frames.back().front().frame_index > d.frame_index)
                fail(ErrorCode::InvalidArgument, "out-of-order frame " + std::to_string(d.frame_index) +
                                                     " in video '" + d.video_id + "'");
            frames.push_back({d});
        }
    }
    return videos;
}

namespace {

PixelBox clamp_to_frame(PixelBox b, int w, int h) {
    b.x1 = std::clamp(b.x1, 0.0, w - 1.0);
    b.y1 = std::clamp(b.y1, 0.0, h - 1.0);
    b.x2 = std::clamp(b.x2, b.x1 + 1.0, double(w));
    b.y2 = std::clamp(b.y2, b.y1 + 1.0, double(h));
    return b;
}

}  // namespace

ObjectTrack to_object_track(const LiveTrack& t, int frame_width, int frame_height) {
    ObjectTrack o;
    o.track_id = t.track_id;
    o.video_id = t.video_id;
    o.object_class = t.object_class;
    o.frame_width = frame_width;
    o.frame_height = frame_height;
    o.frames.reserve(t.history.size());
    for (const auto& f : t.history)
        o.frames.push_back({f.frame_index, clamp_to_frame(f.box, frame_width, frame_height), false, false});
    return o;
}

Dataset track_detections(const std::vector<Detection>& detections, const AssocConfig& config, int frame_width,
                         int frame_height) {
    if (frame_width <= 0 || frame_height <= 0) fail(ErrorCode::InvalidArgument, "frame dimensions must be positive");
    Dataset out;
    for (const auto& [video, frames] : group_detections(detections)) {
        Tracker tracker(config, video + "/trk");
        for (const auto& frame_dets : frames) {
            while (tracker.last_frame() >= 0 && tracker.last_frame() + 1 < frame_dets.front().frame_index)
                tracker.step({});
            tracker.step(frame_dets);
        }
        tracker.finish();
        std::vector<const LiveTrack*> all;
        for (const auto& t : tracker.retired()) all.push_back(&t);
        std::sort(all.begin(), all.end(), [](const LiveTrack* a, const LiveTrack* b) {
            return a->history.front().frame_index != b->history.front().frame_index
                       ? a->history.front().frame_index < b->history.front().frame_index
                       : a->serial < b->serial;
        });
        for (const auto* t : all) out.tracks.push_back(to_object_track(*t, frame_width, frame_height));
    }
    return out;
}

}  // namespace naop
