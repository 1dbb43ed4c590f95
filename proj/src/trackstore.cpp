#include "naop/trackstore.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "naop/error.hpp"
#include "naop/log.hpp"

namespace naop {

namespace {

using nlohmann::json;

template <class T>
T require(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
    return it->get<T>();
}

double require_number(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
    if (!it->is_number()) throw std::invalid_argument(std::string("field '") + key + "' is not a number");
    return it->get<double>();
}

bool require_bool(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
    if (!it->is_boolean()) throw std::invalid_argument(std::string("field '") + key + "' is not a boolean");
    return it->get<bool>();
}

int require_int(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
    if (!it->is_number_integer()) throw std::invalid_argument(std::string("field '") + key + "' is not an integer");
    return it->get<int>();
}

ObjectTrack track_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("line is not a JSON object");
    ObjectTrack t;
    t.track_id = require<std::string>(j, "track_id");
    t.subject_id = require<std::string>(j, "subject_id");
    t.video_id = require<std::string>(j, "video_id");
    t.object_class = require<std::string>(j, "class");
    t.frame_width = require_int(j, "frame_width");
    t.frame_height = require_int(j, "frame_height");
    const auto& frames = j.at("frames");
    if (!frames.is_array()) throw std::invalid_argument("'frames' is not an array");
    t.frames.reserve(frames.size());
    for (const auto& f : frames) {
        TrackFrame tf;
        tf.frame_index = require_int(f, "f");
        tf.box = {require_number(f, "x1"), require_number(f, "y1"), require_number(f, "x2"), require_number(f, "y2")};
        tf.active = require_bool(f, "active");
        tf.annotated = require_bool(f, "annotated");
        t.frames.push_back(tf);
    }
    return t;
}

nlohmann::ordered_json track_to_json(const ObjectTrack& t) {
    nlohmann::ordered_json j;
    j["track_id"] = t.track_id;
    j["subject_id"] = t.subject_id;
    j["video_id"] = t.video_id;
    j["class"] = t.object_class;
    j["frame_width"] = t.frame_width;
    j["frame_height"] = t.frame_height;
    auto frames = nlohmann::ordered_json::array();
    for (const auto& f : t.frames) {
        nlohmann::ordered_json jf;
        jf["f"] = f.frame_index;
        jf["x1"] = f.box.x1;
        jf["y1"] = f.box.y1;
        jf["x2"] = f.box.x2;
        jf["y2"] = f.box.y2;
        jf["active"] = f.active;
        jf["annotated"] = f.annotated;
        frames.push_back(std::move(jf));
    }
    j["frames"] = std::move(frames);
    return j;
}

}  // namespace

NormBox ObjectTrack::norm_box(std::size_t pos) const { return normalize_box(frames.at(pos).box, frame_width, frame_height); }

const char* to_string(TrackKind kind) {
    switch (kind) {
        case TrackKind::Passive: return "passive";
        case TrackKind::Mixed: return "mixed";
        case TrackKind::ActiveOnly: return "active-only";
    }
    return "?";
}

void validate_track(const ObjectTrack& t) {
    auto bad = [&](const std::string& why) { fail(ErrorCode::Parse, "track '" + t.track_id + "': " + why); };
    if (t.track_id.empty()) bad("empty track_id");
    if (t.frame_width <= 0 || t.frame_height <= 0) bad("frame dimensions must be positive");
    if (t.frames.empty()) bad("no frames");
    for (std::size_t i = 0; i < t.frames.size(); ++i) {
        const auto& f = t.frames[i];
        if (f.frame_index < 0) bad("negative frame index");
        if (i > 0 && f.frame_index <= t.frames[i - 1].frame_index)
            bad("frames not strictly ascending at frame " + std::to_string(f.frame_index));
        if (!f.box.valid()) bad("invalid box at frame " + std::to_string(f.frame_index) + " (need x1<x2, y1<y2)");
        if (f.box.x1 < 0 || f.box.y1 < 0 || f.box.x2 > t.frame_width || f.box.y2 > t.frame_height)
            bad("box outside frame bounds at frame " + std::to_string(f.frame_index));
    }
}

Dataset parse_tracks(std::istream& in) {
    Dataset ds;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ObjectTrack t;
        try {
            t = track_from_json(json::parse(line));
            validate_track(t);
        } catch (const std::exception& e) {
            fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!ids.insert(t.track_id).second)
            fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": duplicate track_id '" + t.track_id + "'");
        ds.tracks.push_back(std::move(t));
    }
    return ds;
}

Dataset parse_tracks_string(const std::string& text) {
    std::istringstream in(text);
    return parse_tracks(in);
}

Dataset load_tracks(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open track file '" + path + "'");
    return parse_tracks(in);
}

void serialize_tracks(const Dataset& dataset, std::ostream& out) {
    for (const auto& t : dataset.tracks) out << track_to_json(t).dump() << '\n';
}

std::string serialize_tracks_string(const Dataset& dataset) {
    std::ostringstream out;
    serialize_tracks(dataset, out);
    return out.str();
}

void save_tracks(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write track file '" + path + "'");
    serialize_tracks(dataset, out);
    if (!out) fail(ErrorCode::Io, "write failed for '" + path + "'");
}

TrackKind classify_track(const ObjectTrack& track) {
    bool any_active = false, any_passive = false;
    for (const auto& f : track.frames) (f.active ? any_active : any_passive) = true;
    if (!any_active) return TrackKind::Passive;
    if (!any_passive) return TrackKind::ActiveOnly;
    return TrackKind::Mixed;
}

std::vector<std::size_t> activation_points(const ObjectTrack& track) {
    std::vector<std::size_t> points;
    for (std::size_t i = 1; i < track.frames.size(); ++i)
        if (track.frames[i].active && !track.frames[i - 1].active) points.push_back(i);
    return points;
}

ObjectTrack densify(const ObjectTrack& track) {
    ObjectTrack out = track;
    if (track.frames.size() < 2) return out;
    out.frames.clear();
    out.frames.reserve(static_cast<std::size_t>(track.frames.back().frame_index - track.frames.front().frame_index + 1));
    for (std::size_t i = 0; i + 1 < track.frames.size(); ++i) {
        const auto& a = track.frames[i];
        const auto& b = track.frames[i + 1];
        out.frames.push_back(a);
        const int gap = b.frame_index - a.frame_index;
        for (int k = 1; k < gap; ++k) {
            const double t = static_cast<double>(k) / gap;
            TrackFrame f;
            f.frame_index = a.frame_index + k;
            f.box = {a.box.x1 + t * (b.box.x1 - a.box.x1), a.box.y1 + t * (b.box.y1 - a.box.y1),
                     a.box.x2 + t * (b.box.x2 - a.box.x2), a.box.y2 + t * (b.box.y2 - a.box.y2)};
            f.active = a.active;
            f.annotated = false;
            out.frames.push_back(f);
        }
    }
    out.frames.push_back(track.frames.back());
    return out;
}

Dataset densify(const Dataset& dataset) {
    Dataset out;
    out.frame_rate = dataset.frame_rate;
    out.tracks.reserve(dataset.tracks.size());
    for (const auto& t : dataset.tracks) out.tracks.push_back(densify(t));
    return out;
}

std::vector<std::string> subjects(const Dataset& dataset) {
    std::set<std::string> s;
    for (const auto& t : dataset.tracks) s.insert(t.subject_id);
    return {s.begin(), s.end()};
}

std::pair<Dataset, Dataset> split_by_subject(const Dataset& dataset, const std::string& held_out_subject) {
    Dataset train, test;
    train.frame_rate = test.frame_rate = dataset.frame_rate;
    for (const auto& t : dataset.tracks) (t.subject_id == held_out_subject ? test : train).tracks.push_back(t);
    if (test.tracks.empty()) fail(ErrorCode::InvalidArgument, "unknown subject '" + held_out_subject + "'");
    if (train.tracks.empty()) warn("holding out '" + held_out_subject + "' leaves an empty training set");
    return {std::move(train), std::move(test)};
}

}  // namespace naop
