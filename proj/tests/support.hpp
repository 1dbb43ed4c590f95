#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "naop/trackstore.hpp"

namespace naop::test {

/// Track with one frame per flag starting at `first`, boxes drifting slowly.
inline ObjectTrack make_track(const std::vector<bool>& flags, std::string id = "t0", int first = 0,
                              std::string subject = "s1", std::string cls = "mug") {
    ObjectTrack t;
    t.track_id = std::move(id);
    t.subject_id = std::move(subject);
    t.video_id = t.subject_id + "_v";
    t.object_class = std::move(cls);
    t.frame_width = 640;
    t.frame_height = 480;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        const double x = 100 + static_cast<double>(i % 200);
        t.frames.push_back({first + static_cast<int>(i), {x, 100, x + 50, 160}, flags[i], true});
    }
    return t;
}

inline std::vector<bool> flags_of(const std::string& pattern) {
    std::vector<bool> out;
    for (char c : pattern) out.push_back(c == 'A' || c == 'T' || c == '1');
    return out;
}

inline std::vector<bool> run_flags(std::initializer_list<std::pair<int, bool>> runs) {
    std::vector<bool> out;
    for (auto [n, v] : runs) out.insert(out.end(), static_cast<std::size_t>(n), v);
    return out;
}

/// Random valid track; boxes stay inside the frame.
inline ObjectTrack random_track(std::mt19937_64& rng, const std::string& id, int length, double p_switch = 0.1) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ObjectTrack t;
    t.track_id = id;
    t.subject_id = "s" + std::to_string(rng() % 3);
    t.video_id = t.subject_id + "_v0";
    t.object_class = (rng() % 2) ? "mug" : "tap";
    t.frame_width = 1280;
    t.frame_height = 720;
    bool active = u(rng) < 0.3;
    int frame = static_cast<int>(rng() % 50);
    for (int i = 0; i < length; ++i) {
        if (u(rng) < p_switch) active = !active;
        const double x1 = u(rng) * 1000, y1 = u(rng) * 500;
        t.frames.push_back({frame, {x1, y1, x1 + 1 + u(rng) * 279, y1 + 1 + u(rng) * 219}, active, true});
        frame += 1 + static_cast<int>(rng() % 3);
    }
    return t;
}

}  // namespace naop::test
