#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "naop/tracker.hpp"
#include "naop/trackstore.hpp"

namespace naop {

/// How a next-active object behaves during the approach phase.
struct ApproachModel {
    bool scale_growth = true;      // area multiplies by `growth` every frame
    bool center_drift = true;      // center moves toward `target` by `pull` every frame
    double growth = 1.03;
    double pull = 0.06;
    double target_x = 0.0;
    double target_y = 0.0;
};

struct ScenarioConfig {
    int n_subjects = 5;
    int videos_per_subject = 2;
    int tracks_per_video = 30;
    std::vector<std::string> object_classes{"fridge", "tap", "mug/cup", "pan", "tv remote"};
    double frame_rate = 30.0;
    int frame_width = 1280;
    int frame_height = 960;
    double active_fraction = 0.2;  // share of mixed tracks
    int h_signal = 30;             // approach frames before activation
    double center_noise = 0.002;   // sigma of per-frame center jitter, normalized units
    double scale_noise = 0.01;     // sigma of per-frame log-area jitter
    int min_passive_prefix = 120;  // passive frames before activation in mixed tracks
    int max_passive_prefix = 240;
    int min_active_length = 30;
    int max_active_length = 90;
    int min_passive_length = 60;
    int max_passive_length = 300;
    int annotate_every = 1;  // keep every n-th frame as an annotation (densify fills the rest)
    ApproachModel approach;
    std::map<std::string, ApproachModel> class_overrides;
    std::uint64_t seed = 0;
};

/// Checks the config; throws Error(InvalidArgument) on infeasible settings.
void validate_scenario(const ScenarioConfig& config);

/// Mixed tracks: passive motion, then an approach phase over the last h_signal
/// frames before activation, then an active segment. Passive tracks: stationary
/// jitter or a lateral pass-by with constant scale. Track i is mixed iff
/// floor((i + 1) f) > floor(i f), so exactly floor(N f) tracks are mixed.
Dataset gen_dataset(const ScenarioConfig& config);

struct DetectionNoise {
    double sigma_px = 0.0;
    double fp_rate = 0.0;  // Poisson mean of spurious boxes per frame
    double fn_rate = 0.0;
    std::uint64_t seed = 0;
};

/// Per ground-truth frame: kept with probability 1 - fn_rate, corners jittered
/// by N(0, sigma_px), score in [0.8, 1]. Spurious boxes get scores in [0.5, 1].
/// Output is sorted by (video, frame).
std::vector<Detection> gen_detections(const Dataset& dataset, const DetectionNoise& noise);

/// Fraction of (video, frame) pairs holding at least one passive frame of a mixed track.
double next_active_frame_fraction(const Dataset& dataset);

}  // namespace naop
