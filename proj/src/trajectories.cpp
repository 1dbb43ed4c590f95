#include "naop/trajectories.hpp"

#include <random>

#include "naop/error.hpp"

namespace naop {

namespace {

void check_h(std::size_t h) {
    if (h < 2) fail(ErrorCode::InvalidArgument, "trajectory length h must be >= 2");
}

// Start of the passive run that ends right before position p.
std::size_t passive_run_start(const ObjectTrack& track, std::size_t p) {
    std::size_t r = p;
    while (r > 0 && !track.frames[r - 1].active) --r;
    return r;
}

}  // namespace

Trajectory make_window(const ObjectTrack& track, std::size_t first, std::size_t h, TrajectoryLabel label) {
    if (first + h > track.frames.size()) fail(ErrorCode::InvalidArgument, "window exceeds track length");
    Trajectory t;
    t.label = label;
    t.source_track_id = track.track_id;
    t.object_class = track.object_class;
    t.subject_id = track.subject_id;
    t.end_frame_index = track.frames[first + h - 1].frame_index;
    t.boxes.reserve(h);
    for (std::size_t i = first; i < first + h; ++i) {
        if (i > first && track.frames[i].frame_index != track.frames[i - 1].frame_index + 1)
            fail(ErrorCode::InvalidArgument, "track '" + track.track_id + "' is not dense; densify it first");
        t.boxes.push_back(track.norm_box(i));
    }
    return t;
}

std::vector<Trajectory> extract_active(const ObjectTrack& track, std::size_t h, std::size_t offset) {
    check_h(h);
    std::vector<Trajectory> out;
    for (std::size_t p : activation_points(track)) {
        const std::size_t run = p - passive_run_start(track, p);
        if (run < h + offset) continue;
        out.push_back(make_window(track, p - offset - h, h, TrajectoryLabel::Active));
    }
    return out;
}

std::optional<Trajectory> extract_passive(const ObjectTrack& track, std::size_t h, std::uint64_t seed) {
    check_h(h);
    if (classify_track(track) != TrackKind::Passive)
        fail(ErrorCode::InvalidArgument, "extract_passive called on non-passive track '" + track.track_id + "'");
    if (track.frames.size() < h) return std::nullopt;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> start(0, track.frames.size() - h);
    return make_window(track, start(rng), h, TrajectoryLabel::Passive);
}

std::vector<SlidingWindow> sliding_windows(const ObjectTrack& track, std::size_t h) {
    check_h(h);
    std::vector<SlidingWindow> out;
    if (track.frames.size() < h) return out;
    out.reserve(track.frames.size() - h + 1);
    for (std::size_t p = h - 1; p < track.frames.size(); ++p) {
        auto t = make_window(track, p + 1 - h, h, TrajectoryLabel::Unlabeled);
        out.push_back({t.end_frame_index, std::move(t)});
    }
    return out;
}

std::size_t pyramid_min_length(int levels) { return std::size_t{1} << (levels - 1); }
std::size_t pyramid_box_count(int levels) { return (std::size_t{1} << levels) - 1; }

PyramidEncoding pyramid_encode(std::span<const NormBox> prefix, int levels) {
    if (levels < 1 || levels > 20) fail(ErrorCode::InvalidArgument, "pyramid levels must be in [1, 20]");
    if (prefix.size() < pyramid_min_length(levels))
        fail(ErrorCode::InvalidArgument, "prefix of " + std::to_string(prefix.size()) + " boxes is shorter than " +
                                             std::to_string(pyramid_min_length(levels)));
    PyramidEncoding enc;
    enc.levels = levels;
    enc.boxes.reserve(pyramid_box_count(levels));
    const std::size_t n = prefix.size();
    for (int k = 1; k <= levels; ++k) {
        const std::size_t segments = std::size_t{1} << (k - 1);
        const std::size_t base = n / segments;
        const std::size_t rem = n % segments;
        std::size_t begin = 0;
        for (std::size_t s = 0; s < segments; ++s) {
            const std::size_t len = base + (s < rem ? 1 : 0);
            NormBox mean;
            for (std::size_t i = begin; i < begin + len; ++i) {
                mean.x1 += prefix[i].x1;
                mean.y1 += prefix[i].y1;
                mean.x2 += prefix[i].x2;
                mean.y2 += prefix[i].y2;
            }
            const double inv = 1.0 / static_cast<double>(len);
            mean.x1 *= inv;
            mean.y1 *= inv;
            mean.x2 *= inv;
            mean.y2 *= inv;
            enc.boxes.push_back(mean);
            begin += len;
        }
    }
    return enc;
}

std::vector<Trajectory> extract_active_prefixes(const ObjectTrack& track, int levels) {
    std::vector<Trajectory> out;
    const std::size_t min_len = pyramid_min_length(levels);
    for (std::size_t p : activation_points(track)) {
        const std::size_t r = passive_run_start(track, p);
        if (p - r < min_len) continue;
        out.push_back(make_window(track, r, p - r, TrajectoryLabel::Active));
    }
    return out;
}

std::optional<Trajectory> extract_passive_prefix(const ObjectTrack& track, int levels, std::uint64_t seed) {
    if (classify_track(track) != TrackKind::Passive)
        fail(ErrorCode::InvalidArgument, "extract_passive_prefix called on non-passive track '" + track.track_id + "'");
    const std::size_t min_len = pyramid_min_length(levels);
    if (track.frames.size() < min_len) return std::nullopt;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> len(min_len, track.frames.size());
    return make_window(track, 0, len(rng), TrajectoryLabel::Passive);
}

}  // namespace naop
