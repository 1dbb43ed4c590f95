#include "naop/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "naop/csv.hpp"
#include "naop/descriptors.hpp"
#include "naop/error.hpp"
#include "naop/parallel.hpp"
#include "naop/rng.hpp"
#include "naop/trajectories.hpp"

namespace naop {

namespace {

std::vector<NormBox> normalized_tail(const TrackSnapshot& s, std::size_t n) {
    std::vector<NormBox> boxes;
    boxes.reserve(n);
    for (std::size_t i = s.history.size() - n; i < s.history.size(); ++i)
        boxes.push_back(normalize_box(s.history[i].box, s.frame_width, s.frame_height));
    return boxes;
}

}  // namespace

ForestScorer::ForestScorer(const Forest& forest) : forest_(forest), window_(forest.levels > 0 ? 0 : forest.h) {
    if (forest.trees.empty()) fail(ErrorCode::InvalidArgument, "forest has no trees");
    if (forest.levels > 0 && pyramid_box_count(static_cast<int>(forest.levels)) != forest.h)
        fail(ErrorCode::Mismatch, "pyramid model: h must equal 2^levels - 1");
}

double ForestScorer::score(const TrackSnapshot& s) const {
    std::vector<NormBox> boxes;
    if (forest_.levels > 0) {
        const int levels = static_cast<int>(forest_.levels);
        if (s.history.size() < std::max<std::size_t>(pyramid_min_length(levels), 2)) return -1.0;
        boxes = pyramid_encode(normalized_tail(s, s.history.size()), levels).boxes;
    } else {
        if (s.history.size() < window_) return -1.0;
        boxes = normalized_tail(s, window_);
    }
    return forest_.predict_proba(describe(boxes, forest_.variant));
}

double MotionScorer::score(const TrackSnapshot& s) const {
    if (s.history.size() < h_ || h_ < 2) return -1.0;
    return model_.confidence(motion_magnitude(normalized_tail(s, h_)));
}

double CenterBiasScorer::score(const TrackSnapshot& s) const {
    const NormBox b = normalize_box(s.history.back().box, s.frame_width, s.frame_height);
    const double d = std::hypot(b.xc(), b.yc());
    const double s_c = std::clamp(1.0 - d / (std::sqrt(2.0) / 2.0), 0.0, 1.0);
    return std::clamp(s.detection_score, 0.0, 1.0) * s_c;
}

double RandomScorer::score(const TrackSnapshot& s) const {
    std::uint64_t h = derive_seed(seed_, static_cast<std::uint64_t>(s.history.back().frame_index));
    h = hash_string(*s.video_id, h);
    h = hash_string(*s.track_id, mix64(h));
    return unit_from_bits(mix64(h));
}

std::vector<ScoredPrediction> predict_frame(std::span<const TrackSnapshot> tracks, int frame_index,
                                            const Scorer& scorer) {
    std::vector<ScoredPrediction> out;
    for (const auto& s : tracks) {
        if (s.history.empty() || s.history.back().frame_index != frame_index) continue;
        const double c = scorer.score(s);
        if (c < 0) continue;
        out.push_back({*s.video_id, frame_index, *s.object_class, s.history.back().box, std::clamp(c, 0.0, 1.0),
                       *s.track_id});
    }
    return out;
}

void sort_predictions(std::vector<ScoredPrediction>& p) {
    std::stable_sort(p.begin(), p.end(), [](const ScoredPrediction& a, const ScoredPrediction& b) {
        if (a.video_id != b.video_id) return a.video_id < b.video_id;
        if (a.frame_index != b.frame_index) return a.frame_index < b.frame_index;
        return a.source_track_id < b.source_track_id;
    });
}

std::vector<ScoredPrediction> run_offline(const Dataset& dataset, const Scorer& scorer, int threads) {
    std::vector<std::vector<ScoredPrediction>> per_track(dataset.tracks.size());
    parallel_for(dataset.tracks.size(), threads, [&](std::size_t i) {
        const auto& t = dataset.tracks[i];
        for (std::size_t p = 0; p < t.frames.size(); ++p) {
            if (p > 0 && t.frames[p].frame_index != t.frames[p - 1].frame_index + 1)
                fail(ErrorCode::InvalidArgument, "track '" + t.track_id + "' is not dense; densify it first");
            const TrackSnapshot snap{&t.track_id, &t.video_id, &t.object_class, t.frame_width, t.frame_height,
                                     std::span<const TrackFrame>(t.frames).first(p + 1), 1.0};
            auto preds = predict_frame(std::span(&snap, 1), t.frames[p].frame_index, scorer);
            per_track[i].insert(per_track[i].end(), preds.begin(), preds.end());
        }
    });
    std::vector<ScoredPrediction> out;
    for (auto& v : per_track) out.insert(out.end(), v.begin(), v.end());
    sort_predictions(out);
    return out;
}

std::vector<ScoredPrediction> run_online(const std::vector<Detection>& detections, const AssocConfig& config,
                                         const Scorer& scorer, int frame_width, int frame_height) {
    if (frame_width <= 0 || frame_height <= 0) fail(ErrorCode::InvalidArgument, "frame dimensions must be positive");
    std::vector<ScoredPrediction> out;
    for (const auto& [video, frames] : group_detections(detections)) {
        Tracker tracker(config, video + "/trk");
        tracker.set_keep_retired(false);
        std::vector<TrackSnapshot> snaps;
        auto process = [&](const std::vector<Detection>& dets) {
            const auto confirmed = tracker.step(dets);
            snaps.clear();
            for (const LiveTrack* t : confirmed)
                snaps.push_back({&t->track_id, &t->video_id, &t->object_class, frame_width, frame_height,
                                 std::span<const TrackFrame>(t->history), t->last_score});
            auto preds = predict_frame(snaps, tracker.last_frame(), scorer);
            std::sort(preds.begin(), preds.end(),
                      [](const auto& a, const auto& b) { return a.source_track_id < b.source_track_id; });
            out.insert(out.end(), preds.begin(), preds.end());
        };
        for (const auto& frame_dets : frames) {
            while (tracker.last_frame() >= 0 && tracker.last_frame() + 1 < frame_dets.front().frame_index)
                process({});
            process(frame_dets);
        }
    }
    sort_predictions(out);
    return out;
}

void write_predictions(const std::vector<ScoredPrediction>& predictions, std::ostream& out) {
    out << "video_id,frame,class,x1,y1,x2,y2,confidence,track_id\n";
    for (const auto& p : predictions)
        out << csv_field(p.video_id) << ',' << p.frame_index << ',' << csv_field(p.object_class) << ','
            << fmt_double(p.box.x1) << ',' << fmt_double(p.box.y1) << ',' << fmt_double(p.box.x2) << ','
            << fmt_double(p.box.y2) << ',' << fmt_double(p.confidence) << ',' << csv_field(p.source_track_id) << '\n';
}

std::vector<ScoredPrediction> parse_predictions(std::istream& in) {
    CsvReader csv(in, {"video_id", "frame", "class", "x1", "y1", "x2", "y2", "confidence", "track_id"},
                  "predictions");
    std::vector<ScoredPrediction> out;
    std::vector<std::string> row;
    while (csv.next(row)) {
        ScoredPrediction p;
        p.video_id = row[0];
        p.frame_index = csv.to_int(row[1]);
        p.object_class = row[2];
        p.box = {csv.to_double(row[3]), csv.to_double(row[4]), csv.to_double(row[5]), csv.to_double(row[6])};
        p.confidence = csv.to_double(row[7]);
        p.source_track_id = row[8];
        if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) csv.error("confidence outside [0, 1]");
        if (!p.box.valid()) csv.error("invalid box");
        out.push_back(std::move(p));
    }
    return out;
}

void save_predictions(const std::vector<ScoredPrediction>& predictions, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write predictions file '" + path + "'");
    write_predictions(predictions, out);
}

std::vector<ScoredPrediction> load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open predictions file '" + path + "'");
    return parse_predictions(in);
}

}  // namespace naop
