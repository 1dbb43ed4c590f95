#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "naop/geometry.hpp"

namespace naop {

struct TrackFrame {
    int frame_index = 0;
    PixelBox box;
    bool active = false;
    bool annotated = true;  // false for frames filled in by interpolation

    friend bool operator==(const TrackFrame&, const TrackFrame&) = default;
};

struct ObjectTrack {
    std::string track_id;
    std::string subject_id;
    std::string video_id;
    std::string object_class;
    int frame_width = 0;
    int frame_height = 0;
    std::vector<TrackFrame> frames;

    NormBox norm_box(std::size_t pos) const;

    friend bool operator==(const ObjectTrack&, const ObjectTrack&) = default;
};

enum class TrackKind { Passive, Mixed, ActiveOnly };

const char* to_string(TrackKind kind);

struct Dataset {
    std::vector<ObjectTrack> tracks;
    double frame_rate = 30.0;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Checks every ObjectTrack invariant; throws Error naming the offending track.
void validate_track(const ObjectTrack& track);

/// Reads the JSON-Lines track format. Blank lines are skipped. Errors carry the
/// 1-based line number.
Dataset parse_tracks(std::istream& in);
Dataset parse_tracks_string(const std::string& text);
Dataset load_tracks(const std::string& path);

/// Writes one track per line in the same format `parse_tracks` reads.
void serialize_tracks(const Dataset& dataset, std::ostream& out);
std::string serialize_tracks_string(const Dataset& dataset);
void save_tracks(const Dataset& dataset, const std::string& path);

TrackKind classify_track(const ObjectTrack& track);

/// Positions i > 0 with frames[i] active and frames[i-1] passive.
std::vector<std::size_t> activation_points(const ObjectTrack& track);

/// Fills every missing frame index between annotations with a per-corner linear
/// interpolation. Inserted frames copy the active flag of the preceding frame
/// and are marked `annotated = false`.
ObjectTrack densify(const ObjectTrack& track);
Dataset densify(const Dataset& dataset);

/// Sorted, de-duplicated subject ids.
std::vector<std::string> subjects(const Dataset& dataset);

/// Returns (train, test) where test holds exactly the held-out subject's tracks.
std::pair<Dataset, Dataset> split_by_subject(const Dataset& dataset, const std::string& held_out_subject);

}  // namespace naop
