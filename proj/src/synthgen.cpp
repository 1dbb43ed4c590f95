#include "naop/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>

#include "naop/error.hpp"
#include "naop/rng.hpp"

namespace naop {

namespace {

constexpr double kCenterLimit = 0.25;   // base centers are drawn in [-limit, limit]
constexpr double kPassByLimit = 0.3;    // lateral movers bounce between +-limit
constexpr double kMinArea = 0.005;
constexpr double kMaxArea = 0.04;
constexpr int kMaxStartFrame = 200;

void require(bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::InvalidArgument, "scenario: " + what);
}

std::string padded(int value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*d", width, value);
    return buf;
}

// Box geometry in normalized units: center, width, height.
struct Shape {
    double xc = 0, yc = 0, w = 0, h = 0;
};

PixelBox to_pixels(const Shape& s, int W, int H) {
    NormBox n{s.xc - s.w / 2, s.yc - s.h / 2, s.xc + s.w / 2, s.yc + s.h / 2};
    n.x1 = std::max(n.x1, -0.5);
    n.y1 = std::max(n.y1, -0.5);
    n.x2 = std::min(n.x2, 0.5);
    n.y2 = std::min(n.y2, 0.5);
    return denormalize_box(n, W, H);
}

class Motion {
public:
    Motion(std::mt19937_64& rng, const ScenarioConfig& c) : rng_(rng), c_(c) {
        std::uniform_real_distribution<double> pos(-kCenterLimit, kCenterLimit);
        std::uniform_real_distribution<double> log_area(std::log(kMinArea), std::log(kMaxArea));
        std::uniform_real_distribution<double> log_aspect(std::log(0.6), std::log(1.6));
        base_x_ = pos(rng);
        base_y_ = pos(rng);
        area_ = std::exp(log_area(rng));
        aspect_ = std::exp(log_aspect(rng));
        pass_by_ = std::bernoulli_distribution(0.5)(rng);
        if (pass_by_) {
            std::uniform_real_distribution<double> speed(0.001, 0.004);
            vx_ = speed(rng) * (std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0);
        }
    }

    // Next passive frame: stationary jitter or lateral pass-by, constant scale.
    Shape passive() {
        advance_lateral();
        return emit();
    }

    // Next approach frame: multiplicative area growth and a pull toward the target.
    Shape approach(const ApproachModel& m) {
        if (m.center_drift) {
            base_x_ += m.pull * (m.target_x - base_x_);
            base_y_ += m.pull * (m.target_y - base_y_);
        } else {
            advance_lateral();
        }
        if (m.scale_growth) area_ *= m.growth;
        return emit();
    }

    // Active segment: the object stays where the approach left it.
    Shape active() { return emit(); }

private:
    void advance_lateral() {
        if (!pass_by_) return;
        base_x_ += vx_;
        if (base_x_ > kPassByLimit) {
            base_x_ = 2 * kPassByLimit - base_x_;
            vx_ = -vx_;
        } else if (base_x_ < -kPassByLimit) {
            base_x_ = -2 * kPassByLimit - base_x_;
            vx_ = -vx_;
        }
    }

    Shape emit() {
        double x = base_x_, y = base_y_, area = area_;
        if (c_.scale_noise > 0) area *= std::exp(std::normal_distribution<double>(0.0, c_.scale_noise)(rng_));
        if (c_.center_noise > 0) {
            std::normal_distribution<double> jitter(0.0, c_.center_noise);
            x += jitter(rng_);
            y += jitter(rng_);
        }
        Shape s;
        s.w = std::sqrt(area * aspect_);
        s.h = std::sqrt(area / aspect_);
        s.xc = x;
        s.yc = y;
        return s;
    }

    std::mt19937_64& rng_;
    const ScenarioConfig& c_;
    double base_x_ = 0, base_y_ = 0, area_ = 0, aspect_ = 1, vx_ = 0;
    bool pass_by_ = false;
};

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Keeps every n-th frame plus the first, the last and both sides of each flag change.
void thin_annotations(ObjectTrack& track, int every) {
    if (every <= 1) return;
    std::vector<TrackFrame> kept;
    const auto& f = track.frames;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const bool boundary = i == 0 || i + 1 == f.size() || f[i].active != f[i - 1].active ||
                              f[i].active != f[i + 1].active;
        if (boundary || i % static_cast<std::size_t>(every) == 0) kept.push_back(f[i]);
    }
    track.frames = std::move(kept);
}

}  // namespace

void validate_scenario(const ScenarioConfig& c) {
    require(c.n_subjects >= 1 && c.videos_per_subject >= 1 && c.tracks_per_video >= 1, "all counts must be >= 1");
    require(!c.object_classes.empty(), "object_classes must not be empty");
    require(c.frame_rate > 0, "frame_rate must be positive");
    require(c.frame_width > 0 && c.frame_height > 0, "frame size must be positive");
    require(c.active_fraction > 0 && c.active_fraction < 1, "active_fraction must lie in (0, 1)");
    require(c.h_signal >= 1, "h_signal must be >= 1");
    require(c.center_noise >= 0 && c.scale_noise >= 0, "noise sigmas must be >= 0");
    require(c.min_passive_prefix >= c.h_signal + 1,
            "min_passive_prefix must exceed h_signal (tracks shorter than the approach phase)");
    require(c.min_passive_prefix <= c.max_passive_prefix, "min_passive_prefix > max_passive_prefix");
    require(c.min_active_length >= 1 && c.min_active_length <= c.max_active_length, "bad active length range");
    require(c.min_passive_length >= 2 && c.min_passive_length <= c.max_passive_length, "bad passive length range");
    require(c.annotate_every >= 1, "annotate_every must be >= 1");
    auto check = [&](const ApproachModel& m) {
        require(m.growth > 0 && std::isfinite(m.growth), "approach growth must be positive");
        require(m.pull >= 0 && m.pull <= 1, "approach pull must lie in [0, 1]");
    };
    check(c.approach);
    for (const auto& [cls, m] : c.class_overrides) check(m);
}

Dataset gen_dataset(const ScenarioConfig& c) {
    validate_scenario(c);
    Dataset ds;
    ds.frame_rate = c.frame_rate;
    const double f = c.active_fraction;
    std::size_t global = 0;
    for (int s = 0; s < c.n_subjects; ++s) {
        const std::string subject = "P" + padded(s + 1, 2);
        for (int v = 0; v < c.videos_per_subject; ++v) {
            const std::string video = subject + "_" + padded(v + 1, 2);
            std::mt19937_64 rng(derive_seed(c.seed, hash_string(video)));
            for (int t = 0; t < c.tracks_per_video; ++t, ++global) {
                const double i = static_cast<double>(global);
                const bool mixed = std::floor((i + 1) * f) > std::floor(i * f);

                ObjectTrack track;
                track.track_id = video + "_t" + padded(t, 3);
                track.subject_id = subject;
                track.video_id = video;
                track.object_class = c.object_classes[static_cast<std::size_t>(
                    uniform_int(rng, 0, static_cast<int>(c.object_classes.size()) - 1))];
                track.frame_width = c.frame_width;
                track.frame_height = c.frame_height;
                const int start = uniform_int(rng, 0, kMaxStartFrame);

                Motion motion(rng, c);
                auto push = [&](const Shape& shape, bool active) {
                    const int idx = start + static_cast<int>(track.frames.size());
                    track.frames.push_back({idx, to_pixels(shape, c.frame_width, c.frame_height), active, true});
                };
                if (mixed) {
                    auto it = c.class_overrides.find(track.object_class);
                    const ApproachModel& model = it == c.class_overrides.end() ? c.approach : it->second;
                    const int prefix = uniform_int(rng, c.min_passive_prefix, c.max_passive_prefix);
                    const int active = uniform_int(rng, c.min_active_length, c.max_active_length);
                    for (int k = 0; k < prefix - c.h_signal; ++k) push(motion.passive(), false);
                    for (int k = 0; k < c.h_signal; ++k) push(motion.approach(model), false);
                    for (int k = 0; k < active; ++k) push(motion.active(), true);
                } else {
                    const int length = uniform_int(rng, c.min_passive_length, c.max_passive_length);
                    for (int k = 0; k < length; ++k) push(motion.passive(), false);
                }
                thin_annotations(track, c.annotate_every);
                validate_track(track);
                ds.tracks.push_back(std::move(track));
            }
        }
    }
    return ds;
}

std::vector<Detection> gen_detections(const Dataset& dataset, const DetectionNoise& noise) {
    if (!(noise.sigma_px >= 0)) fail(ErrorCode::InvalidArgument, "sigma_px must be >= 0");
    if (!(noise.fp_rate >= 0)) fail(ErrorCode::InvalidArgument, "fp_rate must be >= 0");
    if (!(noise.fn_rate >= 0 && noise.fn_rate <= 1)) fail(ErrorCode::InvalidArgument, "fn_rate must lie in [0, 1]");

    std::set<std::string> class_set;
    for (const auto& t : dataset.tracks) class_set.insert(t.object_class);
    const std::vector<std::string> classes(class_set.begin(), class_set.end());

    struct VideoInfo {
        int first = 0, last = 0, width = 0, height = 0;
        std::map<int, std::vector<std::pair<const ObjectTrack*, PixelBox>>> frames;
    };
    std::map<std::string, VideoInfo> videos;
    for (const auto& t : dataset.tracks) {
        auto [it, fresh] = videos.try_emplace(t.video_id);
        auto& vi = it->second;
        for (const auto& fr : t.frames) {
            if (fresh) {
                vi.first = vi.last = fr.frame_index;
                vi.width = t.frame_width;
                vi.height = t.frame_height;
                fresh = false;
            }
            vi.first = std::min(vi.first, fr.frame_index);
            vi.last = std::max(vi.last, fr.frame_index);
            vi.frames[fr.frame_index].push_back({&t, fr.box});
        }
    }

    std::vector<Detection> out;
    for (const auto& [video, vi] : videos) {
        std::mt19937_64 rng(derive_seed(noise.seed, hash_string(video)));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::normal_distribution<double> jitter(0.0, noise.sigma_px);
        std::poisson_distribution<int> n_fp(noise.fp_rate > 0 ? noise.fp_rate : 1.0);
        const double W = vi.width, H = vi.height;
        for (int frame = vi.first; frame <= vi.last; ++frame) {
            if (auto it = vi.frames.find(frame); it != vi.frames.end()) {
                for (const auto& [track, box] : it->second) {
                    if (unit(rng) < noise.fn_rate) continue;
                    PixelBox b = box;
                    if (noise.sigma_px > 0) {
                        b.x1 += jitter(rng);
                        b.y1 += jitter(rng);
                        b.x2 += jitter(rng);
                        b.y2 += jitter(rng);
                        b.x1 = std::clamp(b.x1, 0.0, W - 1);
                        b.y1 = std::clamp(b.y1, 0.0, H - 1);
                        b.x2 = std::clamp(b.x2, b.x1 + 1, W);
                        b.y2 = std::clamp(b.y2, b.y1 + 1, H);
                    }
                    out.push_back({video, frame, track->object_class, b, 0.8 + 0.2 * unit(rng)});
                }
            }
            const int spurious = noise.fp_rate > 0 ? n_fp(rng) : 0;
            for (int k = 0; k < spurious; ++k) {
                const double w = 30 + 170 * unit(rng), h = 30 + 170 * unit(rng);
                const double x = (W - w) * unit(rng), y = (H - h) * unit(rng);
                const auto& cls = classes[std::min(classes.size() - 1, static_cast<std::size_t>(unit(rng) * classes.size()))];
                out.push_back({video, frame, cls, {x, y, x + w, y + h}, 0.5 + 0.5 * unit(rng)});
            }
        }
    }
    return out;
}

double next_active_frame_fraction(const Dataset& dataset) {
    std::set<std::pair<std::string, int>> frames, positive;
    for (const auto& t : dataset.tracks) {
        const bool mixed = classify_track(t) == TrackKind::Mixed;
        for (const auto& f : t.frames) {
            frames.insert({t.video_id, f.frame_index});
            if (mixed && !f.active) positive.insert({t.video_id, f.frame_index});
        }
    }
    return frames.empty() ? 0.0 : double(positive.size()) / double(frames.size());
}

}  // namespace naop
