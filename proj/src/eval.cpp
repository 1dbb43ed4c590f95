#include "naop/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "naop/error.hpp"
#include "naop/log.hpp"
#include "naop/parallel.hpp"
#include "naop/rng.hpp"

namespace naop {

// ---------------------------------------------------------------------------
// Ground truth and matching
// ---------------------------------------------------------------------------

std::vector<GtEntry> build_gt(const Dataset& dataset) {
    std::vector<GtEntry> gt;
    for (const auto& t : dataset.tracks) {
        const bool mixed = classify_track(t) == TrackKind::Mixed;
        for (const auto& f : t.frames)
            gt.push_back({t.video_id, f.frame_index, t.object_class, f.box, mixed && !f.active, mixed && f.active,
                          t.track_id});
    }
    if (!dataset.tracks.empty() && count_valid(gt) == 0)
        warn("no passive frame of a mixed track: recall is undefined on this ground truth");
    return gt;
}

std::size_t count_valid(std::span<const GtEntry> gt) {
    return static_cast<std::size_t>(std::count_if(gt.begin(), gt.end(), [](const GtEntry& e) { return e.valid; }));
}

namespace {

using FrameKey = std::pair<std::string, int>;

std::map<FrameKey, std::vector<std::size_t>> index_gt(std::span<const GtEntry> gt) {
    std::map<FrameKey, std::vector<std::size_t>> by_frame;
    for (std::size_t i = 0; i < gt.size(); ++i) by_frame[{gt[i].video_id, gt[i].frame_index}].push_back(i);
    return by_frame;
}

}  // namespace

std::vector<LabeledPrediction> match_predictions(std::span<const ScoredPrediction> predictions,
                                                 std::span<const GtEntry> gt, double iou_min) {
    const auto gt_by_frame = index_gt(gt);
    std::map<FrameKey, std::vector<std::size_t>> preds_by_frame;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        preds_by_frame[{predictions[i].video_id, predictions[i].frame_index}].push_back(i);

    std::vector<LabeledPrediction> out(predictions.size());
    for (auto& [key, idx] : preds_by_frame) {
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return predictions[a].confidence > predictions[b].confidence;
        });
        auto it = gt_by_frame.find(key);
        std::vector<char> claimed(it == gt_by_frame.end() ? 0 : it->second.size(), 0);
        for (std::size_t pi : idx) {
            const auto& p = predictions[pi];
            out[pi].confidence = p.confidence;
            if (it == gt_by_frame.end()) continue;
            double best_iou = -1.0;
            std::size_t best = 0;
            for (std::size_t k = 0; k < it->second.size(); ++k) {
                const auto& e = gt[it->second[k]];
                if (!e.valid || claimed[k] || e.object_class != p.object_class) continue;
                const double o = iou(p.box, e.box);
                if (o >= iou_min && o > best_iou) {
                    best_iou = o;
                    best = k;
                }
            }
            if (best_iou >= 0.0) {
                claimed[best] = 1;
                out[pi].true_positive = true;
            }
        }
    }
    return out;
}

EvalReport pr_and_ap(std::span<const LabeledPrediction> labeled, std::size_t n_valid_gt) {
    if (n_valid_gt == 0) fail(ErrorCode::InvalidArgument, "no valid ground truth: recall is undefined");
    std::vector<std::size_t> order(labeled.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return labeled[a].confidence > labeled[b].confidence; });

    EvalReport r;
    r.counts.n_valid_gt = n_valid_gt;
    r.counts.n_predictions = labeled.size();
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& l = labeled[order[i]];
        (l.true_positive ? tp : fp) += 1;
        const bool group_end = i + 1 == order.size() || labeled[order[i + 1]].confidence != l.confidence;
        if (group_end)
            r.pr.push_back({double(tp) / double(tp + fp), double(tp) / double(n_valid_gt), l.confidence});
    }
    r.counts.tp = tp;
    r.counts.fp = fp;

    // All-points interpolation: precision at recall R is the best precision at any recall >= R.
    double ap = 0.0, running_max = 0.0;
    std::vector<double> interp(r.pr.size());
    for (std::size_t i = r.pr.size(); i-- > 0;) {
        running_max = std::max(running_max, r.pr[i].precision);
        interp[i] = running_max;
    }
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < r.pr.size(); ++i) {
        ap += (r.pr[i].recall - prev_recall) * interp[i];
        prev_recall = r.pr[i].recall;
    }
    r.ap = ap;
    return r;
}

EvalReport evaluate_detections(std::span<const ScoredPrediction> predictions, std::span<const GtEntry> gt,
                               double iou_min) {
    const auto labeled = match_predictions(predictions, gt, iou_min);
    return pr_and_ap(labeled, count_valid(gt));
}

std::vector<FireRateRow> active_fire_rate(std::span<const ScoredPrediction> predictions, std::span<const GtEntry> gt,
                                          std::span<const double> thresholds, double iou_min) {
    std::map<FrameKey, std::vector<std::size_t>> preds_by_frame;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        preds_by_frame[{predictions[i].video_id, predictions[i].frame_index}].push_back(i);

    // Highest confidence of any same-class prediction overlapping each active box.
    std::vector<double> fire_conf;
    for (const auto& e : gt) {
        if (!e.active) continue;
        double best = -1.0;
        auto it = preds_by_frame.find({e.video_id, e.frame_index});
        if (it != preds_by_frame.end())
            for (std::size_t pi : it->second) {
                const auto& p = predictions[pi];
                if (p.object_class == e.object_class && iou(p.box, e.box) >= iou_min) best = std::max(best, p.confidence);
            }
        fire_conf.push_back(best);
    }
    if (fire_conf.empty()) fail(ErrorCode::InvalidArgument, "no active-segment ground truth for fire-rate analysis");

    const auto labeled = match_predictions(predictions, gt, iou_min);
    const std::size_t n_valid = count_valid(gt);
    std::vector<FireRateRow> rows;
    for (double t : thresholds) {
        FireRateRow row;
        row.threshold = t;
        row.n_active_gt = fire_conf.size();
        row.n_active_fired =
            static_cast<std::size_t>(std::count_if(fire_conf.begin(), fire_conf.end(), [&](double c) { return c >= t; }));
        row.frac_active_fired = double(row.n_active_fired) / double(row.n_active_gt);
        std::size_t kept = 0, tp = 0;
        for (const auto& l : labeled)
            if (l.confidence >= t) {
                ++kept;
                tp += l.true_positive;
            }
        row.precision = kept ? double(tp) / double(kept) : 0.0;
        row.recall = n_valid ? double(tp) / double(n_valid) : 0.0;
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Trajectory protocols
// ---------------------------------------------------------------------------

const char* to_string(Method method) {
    switch (method) {
        case Method::Forest: return "forest";
        case Method::Motion: return "motion";
        case Method::Random: return "random";
        case Method::CenterBias: return "center";
    }
    return "?";
}

std::optional<Method> parse_method(std::string_view name) {
    for (auto m : {Method::Forest, Method::Motion, Method::Random, Method::CenterBias})
        if (name == to_string(m)) return m;
    return std::nullopt;
}

namespace {

std::size_t model_h(const ProtocolConfig& config) {
    return config.levels > 0 ? pyramid_box_count(config.levels) : config.h;
}

std::uint64_t trajectory_key(const Trajectory& t) {
    return hash_string(t.source_track_id, static_cast<std::uint64_t>(t.end_frame_index) * 0x9e3779b97f4a7c15ULL);
}

EvalReport tag(EvalReport r, const ProtocolConfig& config) {
    r.method = to_string(config.method);
    r.h = model_h(config);
    r.variant = config.method == Method::Forest ? to_string(config.variant) : "-";
    return r;
}

}  // namespace

std::vector<Trajectory> extract_labeled(const Dataset& dataset, const ProtocolConfig& config, std::uint64_t seed,
                                        std::size_t offset) {
    if (config.levels > 0 && offset > 0)
        fail(ErrorCode::InvalidArgument, "prediction offsets apply to fixed-length windows only");
    std::vector<Trajectory> out;
    for (const auto& t : dataset.tracks) {
        const auto kind = classify_track(t);
        if (kind == TrackKind::Mixed) {
            auto a = config.levels > 0 ? extract_active_prefixes(t, config.levels) : extract_active(t, config.h, offset);
            for (auto& x : a) out.push_back(std::move(x));
        } else if (kind == TrackKind::Passive) {
            const std::uint64_t s = derive_seed(seed, hash_string(t.track_id));
            auto p = config.levels > 0 ? extract_passive_prefix(t, config.levels, s) : extract_passive(t, config.h, s);
            if (p) out.push_back(std::move(*p));
        }
    }
    return out;
}

std::vector<NormBox> encode_for_model(const Trajectory& trajectory, int levels) {
    if (levels > 0) return pyramid_encode(trajectory.boxes, levels).boxes;
    return trajectory.boxes;
}

double FoldModel::score(const Trajectory& t, const ProtocolConfig& config, std::uint64_t key) const {
    switch (method) {
        case Method::Forest: {
            const auto boxes = encode_for_model(t, config.levels);
            return forest->predict_proba(describe(boxes, forest->variant));
        }
        case Method::Motion: return threshold.confidence(motion_magnitude(encode_for_model(t, config.levels)));
        case Method::Random: return unit_from_bits(derive_seed(seed, key));
        case Method::CenterBias: {
            const NormBox& b = t.boxes.back();
            return std::clamp(1.0 - std::hypot(b.xc(), b.yc()) / (std::sqrt(2.0) / 2.0), 0.0, 1.0);
        }
    }
    return 0.0;
}

std::unique_ptr<Scorer> FoldModel::scorer(const ProtocolConfig& config) const {
    switch (method) {
        case Method::Forest: return std::make_unique<ForestScorer>(*forest);
        case Method::Motion:
            if (config.levels > 0) fail(ErrorCode::InvalidArgument, "motion scorer needs a fixed window");
            return std::make_unique<MotionScorer>(threshold, config.h);
        case Method::Random: return std::make_unique<RandomScorer>(seed);
        case Method::CenterBias: return std::make_unique<CenterBiasScorer>();
    }
    return nullptr;
}

FoldModel train_method(std::span<const Trajectory> train, const ProtocolConfig& config, std::uint64_t seed) {
    FoldModel model;
    model.method = config.method;
    model.seed = seed;
    if (config.method == Method::Random || config.method == Method::CenterBias) return model;

    std::vector<std::uint8_t> labels;
    labels.reserve(train.size());
    for (const auto& t : train) labels.push_back(t.label == TrajectoryLabel::Active ? 1 : 0);
    if (config.shuffle_train_labels) {
        std::mt19937_64 rng(derive_seed(seed, 0x5a));
        std::shuffle(labels.begin(), labels.end(), rng);
    }
    const auto n_active = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
    if (n_active == 0 || n_active == labels.size())
        fail(ErrorCode::InvalidArgument, "training trajectories must contain both active and passive samples");

    if (config.method == Method::Motion) {
        std::vector<double> m;
        m.reserve(train.size());
        for (const auto& t : train) m.push_back(motion_magnitude(encode_for_model(t, config.levels)));
        model.threshold = fit_threshold(m, labels, derive_seed(seed, 1));
        return model;
    }

    const std::size_t h = model_h(config);
    SampleSet samples(descriptor_dimension(config.variant, h));
    for (std::size_t i = 0; i < train.size(); ++i)
        samples.add(describe(encode_for_model(train[i], config.levels), config.variant), labels[i] != 0);
    const SampleSet balanced = balance(samples, derive_seed(seed, 1));
    TrainConfig tc = config.train;
    tc.seed = derive_seed(seed, 2);
    tc.threads = config.threads;
    model.forest = naop::train(balanced, tc, config.variant, static_cast<std::uint32_t>(h),
                         static_cast<std::uint32_t>(std::max(config.levels, 0)));
    return model;
}

FoldModel train_method(const Dataset& train, const ProtocolConfig& config, std::uint64_t seed) {
    const auto trajectories = extract_labeled(densify(train), config, seed);
    return train_method(trajectories, config, seed);
}

EvalReport evaluate_trajectories(const FoldModel& model, std::span<const Trajectory> test,
                                 const ProtocolConfig& config) {
    std::vector<LabeledPrediction> labeled;
    labeled.reserve(test.size());
    std::size_t positives = 0;
    for (const auto& t : test) {
        const bool active = t.label == TrajectoryLabel::Active;
        positives += active;
        labeled.push_back({model.score(t, config, trajectory_key(t)), active});
    }
    return tag(pr_and_ap(labeled, positives), config);
}

// ---------------------------------------------------------------------------
// LOPO and friends
// ---------------------------------------------------------------------------

LopoReport lopo(const Dataset& dataset, const FoldEvaluator& evaluate, std::uint64_t seed, int threads) {
    const auto subs = subjects(dataset);
    if (subs.size() < 2) fail(ErrorCode::InvalidArgument, "leave-one-person-out needs at least 2 subjects");
    LopoReport report;
    report.folds.resize(subs.size());
    parallel_for(subs.size(), threads, [&](std::size_t i) {
        auto [train, test] = split_by_subject(dataset, subs[i]);
        auto& fold = report.folds[i];
        fold.subject = subs[i];
        fold.n_train_tracks = train.tracks.size();
        fold.n_test_tracks = test.tracks.size();
        for (const auto& t : train.tracks)
            if (t.subject_id == subs[i]) fail(ErrorCode::Internal, "held-out subject leaked into training fold");
        fold.report = evaluate(train, test, derive_seed(seed, i));
        fold.report.fold = subs[i];
        fold.skipped = fold.report.counts.n_valid_gt == 0;
    });
    double sum_ap = 0, sum_rate = 0;
    std::size_t used = 0;
    for (const auto& f : report.folds) {
        if (f.skipped) continue;
        sum_ap += f.report.ap;
        sum_rate += f.report.positive_rate();
        ++used;
    }
    if (used == 0) fail(ErrorCode::InvalidArgument, "no fold has positive test samples");
    report.mean_ap = sum_ap / double(used);
    report.mean_positive_rate = sum_rate / double(used);
    return report;
}

namespace {

int fold_threads(const ProtocolConfig& config) { return std::max(config.threads, 1); }

ProtocolConfig inner(ProtocolConfig config) {
    config.threads = 1;
    return config;
}

LopoReport label(LopoReport r, const ProtocolConfig& config) {
    r.method = to_string(config.method);
    r.variant = config.method == Method::Forest ? to_string(config.variant) : "-";
    r.h = model_h(config);
    r.levels = config.levels;
    return r;
}

}  // namespace

LopoReport lopo_trajectories(const Dataset& dataset, const ProtocolConfig& config) {
    const Dataset dense = densify(dataset);
    const ProtocolConfig in = inner(config);
    auto evaluate = [&](const Dataset& train, const Dataset& test, std::uint64_t fold_seed) {
        const auto test_t = extract_labeled(test, in, in.seed);
        const bool any_positive = std::any_of(test_t.begin(), test_t.end(),
                                              [](const Trajectory& t) { return t.label == TrajectoryLabel::Active; });
        if (!any_positive) return tag(EvalReport{}, in);
        const auto train_t = extract_labeled(train, in, fold_seed);
        const FoldModel model = train_method(train_t, in, fold_seed);
        return evaluate_trajectories(model, test_t, in);
    };
    return label(lopo(dense, evaluate, config.seed, fold_threads(config)), config);
}

LopoReport lopo_detections(const Dataset& dataset, const ProtocolConfig& config) {
    const Dataset dense = densify(dataset);
    const ProtocolConfig in = inner(config);
    auto evaluate = [&](const Dataset& train, const Dataset& test, std::uint64_t fold_seed) {
        const auto gt = build_gt(test);
        if (count_valid(gt) == 0) return tag(EvalReport{}, in);
        const FoldModel model = train_method(extract_labeled(train, in, fold_seed), in, fold_seed);
        const auto scorer = model.scorer(in);
        const auto preds = run_offline(test, *scorer, 1);
        return tag(evaluate_detections(preds, gt, in.iou_min), in);
    };
    return label(lopo(dense, evaluate, config.seed, fold_threads(config)), config);
}

LoooRow looo(const Dataset& dataset, const std::string& object_class, const ProtocolConfig& config) {
    const Dataset dense = densify(dataset);
    const auto subs = subjects(dense);
    if (subs.size() < 2) fail(ErrorCode::InvalidArgument, "leave-one-object-out runs inside LOPO: need >= 2 subjects");
    if (std::none_of(dense.tracks.begin(), dense.tracks.end(),
                     [&](const ObjectTrack& t) { return t.object_class == object_class; }))
        fail(ErrorCode::InvalidArgument, "object class '" + object_class + "' is absent");
    const ProtocolConfig in = inner(config);

    struct FoldScores {
        std::vector<LabeledPrediction> without, with;
    };
    std::vector<FoldScores> folds(subs.size());
    parallel_for(subs.size(), fold_threads(config), [&](std::size_t i) {
        auto [train, test] = split_by_subject(dense, subs[i]);
        std::vector<Trajectory> test_t;
        for (auto& t : extract_labeled(test, in, in.seed))
            if (t.object_class == object_class) test_t.push_back(std::move(t));
        if (test_t.empty()) return;
        const std::uint64_t fold_seed = derive_seed(config.seed, i);
        const auto train_with = extract_labeled(train, in, fold_seed);
        std::vector<Trajectory> train_without;
        for (const auto& t : train_with)
            if (t.object_class != object_class) train_without.push_back(t);
        const FoldModel m_with = train_method(train_with, in, fold_seed);
        const FoldModel m_without = train_method(train_without, in, fold_seed);
        for (const auto& t : test_t) {
            const bool active = t.label == TrajectoryLabel::Active;
            folds[i].with.push_back({m_with.score(t, in, trajectory_key(t)), active});
            folds[i].without.push_back({m_without.score(t, in, trajectory_key(t)), active});
        }
    });

    std::vector<LabeledPrediction> with, without;
    for (const auto& f : folds) {
        with.insert(with.end(), f.with.begin(), f.with.end());
        without.insert(without.end(), f.without.begin(), f.without.end());
    }
    LoooRow row;
    row.object_class = object_class;
    row.n_test = with.size();
    row.n_active = static_cast<std::size_t>(
        std::count_if(with.begin(), with.end(), [](const LabeledPrediction& l) { return l.true_positive; }));
    if (row.n_active == 0)
        fail(ErrorCode::InvalidArgument, "object class '" + object_class + "' has no active test trajectory");
    row.ap_with = pr_and_ap(with, row.n_active).ap;
    row.ap_without = pr_and_ap(without, row.n_active).ap;
    return row;
}

std::vector<LoooRow> looo_all(const Dataset& dataset, const ProtocolConfig& config) {
    std::set<std::string> classes;
    for (const auto& t : extract_labeled(densify(dataset), config, config.seed))
        if (t.label == TrajectoryLabel::Active) classes.insert(t.object_class);
    std::vector<LoooRow> rows;
    for (const auto& c : classes) rows.push_back(looo(dataset, c, config));
    return rows;
}

std::vector<TimeRow> time_to_activation(const FoldModel& model, const Dataset& test,
                                        std::span<const std::size_t> offsets, const ProtocolConfig& config,
                                        std::uint64_t seed) {
    if (config.levels > 0) fail(ErrorCode::InvalidArgument, "time-to-activation needs fixed-length windows");
    const Dataset dense = densify(test);
    std::vector<Trajectory> negatives;
    for (auto& t : extract_labeled(dense, config, seed))
        if (t.label == TrajectoryLabel::Passive) negatives.push_back(std::move(t));
    std::vector<TimeRow> rows;
    for (std::size_t k : offsets) {
        std::vector<Trajectory> set;
        for (const auto& track : dense.tracks)
            if (classify_track(track) == TrackKind::Mixed)
                for (auto& t : extract_active(track, config.h, k)) set.push_back(std::move(t));
        TimeRow row;
        row.offset = k;
        if (!set.empty()) {
            set.insert(set.end(), negatives.begin(), negatives.end());
            const auto r = evaluate_trajectories(model, set, config);
            row.ap = r.ap;
            row.positive_rate = r.positive_rate();
            row.n_folds = 1;
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<TimeRow> lopo_time_to_activation(const Dataset& dataset, std::span<const std::size_t> offsets,
                                             const ProtocolConfig& config) {
    const Dataset dense = densify(dataset);
    const auto subs = subjects(dense);
    if (subs.size() < 2) fail(ErrorCode::InvalidArgument, "leave-one-person-out needs at least 2 subjects");
    const ProtocolConfig in = inner(config);
    std::vector<std::vector<TimeRow>> per_fold(subs.size());
    parallel_for(subs.size(), fold_threads(config), [&](std::size_t i) {
        auto [train, test] = split_by_subject(dense, subs[i]);
        const std::uint64_t fold_seed = derive_seed(config.seed, i);
        const FoldModel model = train_method(extract_labeled(train, in, fold_seed), in, fold_seed);
        per_fold[i] = time_to_activation(model, test, offsets, in, in.seed);
    });
    std::vector<TimeRow> rows(offsets.size());
    for (std::size_t k = 0; k < offsets.size(); ++k) {
        rows[k].offset = offsets[k];
        for (const auto& f : per_fold) {
            if (f[k].n_folds == 0) continue;
            rows[k].ap += f[k].ap;
            rows[k].positive_rate += f[k].positive_rate;
            ++rows[k].n_folds;
        }
        if (rows[k].n_folds > 0) {
            rows[k].ap /= double(rows[k].n_folds);
            rows[k].positive_rate /= double(rows[k].n_folds);
        }
    }
    return rows;
}

std::vector<SweepRow> sweep(const Dataset& dataset, std::span<const std::size_t> hs, std::span<const int> levels,
                            std::span<const DescriptorVariant> variants, const ProtocolConfig& config) {
    std::vector<SweepRow> rows;
    auto run = [&](std::size_t h, int l, DescriptorVariant v) {
        ProtocolConfig c = config;
        c.method = Method::Forest;
        c.h = h;
        c.levels = l;
        c.variant = v;
        const auto r = lopo_trajectories(dataset, c);
        rows.push_back({l > 0 ? "pyramid" : "fixed", l > 0 ? pyramid_box_count(l) : h, l, to_string(v), r.mean_ap,
                        r.mean_positive_rate});
    };
    for (std::size_t h : hs)
        for (auto v : variants) run(h, 0, v);
    for (int l : levels) {
        if (l < 2) fail(ErrorCode::InvalidArgument, "pyramid levels must be >= 2");
        for (auto v : variants) run(0, l, v);
    }
    return rows;
}

}  // namespace naop
