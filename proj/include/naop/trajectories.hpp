#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "naop/geometry.hpp"
#include "naop/trackstore.hpp"

namespace naop {

enum class TrajectoryLabel { Passive = 0, Active = 1, Unlabeled = 2 };

/// A window of consecutive normalized boxes from one track.
struct Trajectory {
    std::vector<NormBox> boxes;
    TrajectoryLabel label = TrajectoryLabel::Unlabeled;
    std::string source_track_id;
    int end_frame_index = 0;
    std::string object_class;
    std::string subject_id;

    std::size_t length() const { return boxes.size(); }
};

/// Copies positions [first, first + h) of `track` into a trajectory.
Trajectory make_window(const ObjectTrack& track, std::size_t first, std::size_t h, TrajectoryLabel label);

/// One Active trajectory per activation point that has at least h passive frames
/// right before it; the window ends one frame before the activation point.
/// `offset` shifts the window k frames further back; the whole window must still
/// be passive and lie after the previous active segment.
std::vector<Trajectory> extract_active(const ObjectTrack& track, std::size_t h, std::size_t offset = 0);

/// A uniformly random h-frame window of a Passive track, or nothing when the
/// track is shorter than h. Throws for non-passive tracks.
std::optional<Trajectory> extract_passive(const ObjectTrack& track, std::size_t h, std::uint64_t seed);

struct SlidingWindow {
    int end_frame_index = 0;
    Trajectory trajectory;
};

std::vector<SlidingWindow> sliding_windows(const ObjectTrack& track, std::size_t h);

struct PyramidEncoding {
    int levels = 0;
    std::vector<NormBox> boxes;  // 2^levels - 1 boxes, coarse to fine
};

/// Temporal pyramid: level k splits the prefix into 2^(k-1) contiguous segments
/// (earlier segments take the remainder) and emits each segment's mean box.
PyramidEncoding pyramid_encode(std::span<const NormBox> prefix, int levels);

/// Minimum prefix length accepted by pyramid_encode.
std::size_t pyramid_min_length(int levels);
std::size_t pyramid_box_count(int levels);

/// Whole-prefix trajectories for the multiscale scheme. Active: the passive run
/// preceding each activation point. Passive: one random prefix per passive track.
/// Prefixes shorter than pyramid_min_length(levels) are dropped.
std::vector<Trajectory> extract_active_prefixes(const ObjectTrack& track, int levels);
std::optional<Trajectory> extract_passive_prefix(const ObjectTrack& track, int levels, std::uint64_t seed);

}  // namespace naop
