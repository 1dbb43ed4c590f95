#include "naop/forest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include "naop/error.hpp"
#include "naop/log.hpp"
#include "naop/parallel.hpp"
#include "naop/rng.hpp"

namespace naop {

// ---------------------------------------------------------------------------
// SampleSet / balance
// ---------------------------------------------------------------------------

void SampleSet::add(std::span<const double> x, bool active) {
    if (labels_.empty() && dim_ == 0) dim_ = x.size();
    if (x.size() != dim_)
        fail(ErrorCode::Mismatch, "sample dimension " + std::to_string(x.size()) + " != " + std::to_string(dim_));
    values_.insert(values_.end(), x.begin(), x.end());
    labels_.push_back(active ? 1 : 0);
}

std::size_t SampleSet::count_active() const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), std::uint8_t{1}));
}

SampleSet SampleSet::subset(std::span<const std::size_t> rows) const {
    SampleSet out(dim_);
    out.values_.reserve(rows.size() * dim_);
    out.labels_.reserve(rows.size());
    for (std::size_t r : rows) {
        auto x = row(r);
        out.values_.insert(out.values_.end(), x.begin(), x.end());
        out.labels_.push_back(labels_[r]);
    }
    return out;
}

SampleSet balance(const SampleSet& samples, std::uint64_t seed) {
    std::vector<std::size_t> actives, passives;
    for (std::size_t i = 0; i < samples.size(); ++i) (samples.label(i) ? actives : passives).push_back(i);
    if (actives.empty() || passives.empty())
        fail(ErrorCode::InvalidArgument, "balance needs at least one active and one passive sample");
    if (passives.size() < actives.size()) {
        warn("fewer passive (" + std::to_string(passives.size()) + ") than active (" +
             std::to_string(actives.size()) + ") samples; actives are not subsampled");
        return samples;
    }
    if (passives.size() == actives.size()) return samples;

    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates: the first |actives| slots become a uniform subset.
    for (std::size_t i = 0; i < actives.size(); ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, passives.size() - 1);
        std::swap(passives[i], passives[pick(rng)]);
    }
    passives.resize(actives.size());
    std::sort(passives.begin(), passives.end());
    std::vector<std::size_t> rows = actives;
    rows.insert(rows.end(), passives.begin(), passives.end());
    return samples.subset(rows);
}

// ---------------------------------------------------------------------------
// Split search
// ---------------------------------------------------------------------------

namespace {

// Size-weighted Gini of a split is 2 (a_l (n_l - a_l) / n_l + a_r (n_r - a_r) / n_r) / n.
// Candidates are ranked by the exact rational num / den so equal impurities tie exactly.
struct GiniKey {
    unsigned __int128 num = 0;
    unsigned __int128 den = 1;

    GiniKey(std::size_t active_left, std::size_t n_left, std::size_t active_right, std::size_t n_right)
        : num(static_cast<unsigned __int128>(active_left) * (n_left - active_left) * n_right +
              static_cast<unsigned __int128>(active_right) * (n_right - active_right) * n_left),
          den(static_cast<unsigned __int128>(n_left) * n_right) {}

    bool operator<(const GiniKey& o) const { return num * o.den < o.num * den; }
    double value(std::size_t n) const { return 2.0 * double(num) / double(den) / double(n); }
};

}  // namespace

std::optional<SplitChoice> best_gini_split(const SampleSet& samples, std::span<const std::size_t> rows,
                                           std::span<const std::size_t> features, std::size_t min_samples_leaf) {
    const std::size_t n = rows.size();
    if (n < 2) return std::nullopt;
    const std::size_t min_leaf = std::max<std::size_t>(min_samples_leaf, 1);
    std::size_t total_active = 0;
    for (std::size_t r : rows) total_active += samples.label(r);

    std::optional<SplitChoice> best;
    std::optional<GiniKey> best_key;
    std::vector<std::pair<double, std::uint8_t>> column(n);
    for (std::size_t f : features) {
        for (std::size_t i = 0; i < n; ++i) column[i] = {samples.at(rows[i], f), samples.label(rows[i]) ? 1 : 0};
        std::sort(column.begin(), column.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::size_t left_active = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_active += column[i].second;
            const std::size_t n_left = i + 1;
            if (column[i].first == column[i + 1].first) continue;
            if (n_left < min_leaf || n - n_left < min_leaf) continue;
            const GiniKey key(left_active, n_left, total_active - left_active, n - n_left);
            if (!best_key || key < *best_key) {
                double thr = 0.5 * (column[i].first + column[i + 1].first);
                if (!(thr < column[i + 1].first)) thr = column[i].first;
                best_key = key;
                best = SplitChoice{f, thr, key.value(n)};
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Tree growing
// ---------------------------------------------------------------------------

namespace {

class TreeGrower {
public:
    TreeGrower(const SampleSet& samples, const TrainConfig& config, std::uint64_t seed)
        : samples_(samples), config_(config), rng_(seed), features_(samples.dim()) {
        std::iota(features_.begin(), features_.end(), std::size_t{0});
        const std::size_t d = samples.dim();
        per_split_ = config.features_per_split > 0
                         ? static_cast<std::size_t>(config.features_per_split)
                         : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
        per_split_ = std::clamp<std::size_t>(per_split_, 1, d);
    }

    DecisionTree grow(std::vector<std::size_t> rows) {
        build(rows, 0);
        return std::move(tree_);
    }

private:
    std::int32_t build(std::vector<std::size_t>& rows, int depth) {
        const auto index = static_cast<std::int32_t>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        std::size_t active = 0;
        for (std::size_t r : rows) active += samples_.label(r);
        {
            auto& node = tree_.nodes[static_cast<std::size_t>(index)];
            node.count = static_cast<std::uint32_t>(rows.size());
            node.active_fraction = rows.empty() ? 0.0 : double(active) / double(rows.size());
        }
        const bool pure = active == 0 || active == rows.size();
        const bool depth_capped = config_.max_depth > 0 && depth >= config_.max_depth;
        const std::size_t min_leaf = static_cast<std::size_t>(std::max(config_.min_samples_leaf, 1));
        if (pure || depth_capped || rows.size() < 2 * min_leaf) return index;

        auto split = choose_split(rows, min_leaf);
        if (!split) return index;

        std::vector<std::size_t> left, right;
        left.reserve(rows.size());
        right.reserve(rows.size());
        for (std::size_t r : rows)
            (samples_.at(r, split->feature) <= split->threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        const std::int32_t l = build(left, depth + 1);
        const std::int32_t r = build(right, depth + 1);
        auto& node = tree_.nodes[static_cast<std::size_t>(index)];
        node.feature = static_cast<std::int32_t>(split->feature);
        node.threshold = split->threshold;
        node.left = l;
        node.right = r;
        return index;
    }

    // Draws per_split_ features without replacement; when none of them can split
    // the node, keeps drawing the remaining features one at a time.
    std::optional<SplitChoice> choose_split(const std::vector<std::size_t>& rows, std::size_t min_leaf) {
        const std::size_t d = features_.size();
        std::size_t drawn = 0;
        auto draw = [&] {
            std::uniform_int_distribution<std::size_t> pick(drawn, d - 1);
            std::swap(features_[drawn], features_[pick(rng_)]);
            ++drawn;
        };
        while (drawn < per_split_) draw();
        auto best = best_gini_split(samples_, rows, std::span(features_).first(drawn), min_leaf);
        while (!best && drawn < d) {
            draw();
            best = best_gini_split(samples_, rows, std::span(features_).subspan(drawn - 1, 1), min_leaf);
        }
        return best;
    }

    const SampleSet& samples_;
    const TrainConfig& config_;
    std::mt19937_64 rng_;
    std::vector<std::size_t> features_;
    std::size_t per_split_ = 1;
    DecisionTree tree_;
};

void check_training_set(const SampleSet& samples) {
    if (samples.empty()) fail(ErrorCode::InvalidArgument, "empty training set");
    if (samples.dim() == 0) fail(ErrorCode::InvalidArgument, "zero-dimensional samples");
    const std::size_t a = samples.count_active();
    if (a == 0 || a == samples.size()) fail(ErrorCode::InvalidArgument, "training set holds a single class");
}

}  // namespace

double DecisionTree::predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].active_fraction;
}

std::size_t DecisionTree::depth() const {
    if (nodes.empty()) return 0;
    std::size_t best = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (!nodes[i].is_leaf()) {
            stack.push_back({static_cast<std::size_t>(nodes[i].left), d + 1});
            stack.push_back({static_cast<std::size_t>(nodes[i].right), d + 1});
        }
    }
    return best;
}

DecisionTree train_tree(const SampleSet& samples, const TrainConfig& config, std::uint64_t tree_seed) {
    check_training_set(samples);
    TreeGrower grower(samples, config, tree_seed);
    std::vector<std::size_t> rows(samples.size());
    if (config.bootstrap) {
        std::mt19937_64 rng(derive_seed(tree_seed, 0xb007));
        std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
        for (auto& r : rows) r = pick(rng);
        std::sort(rows.begin(), rows.end());
    } else {
        std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    return grower.grow(std::move(rows));
}

Forest train(const SampleSet& samples, const TrainConfig& config, DescriptorVariant variant, std::uint32_t h,
             std::uint32_t levels) {
    check_training_set(samples);
    if (config.n_trees < 1) fail(ErrorCode::InvalidArgument, "n_trees must be >= 1");
    if (config.features_per_split < 0 || static_cast<std::size_t>(config.features_per_split) > samples.dim())
        fail(ErrorCode::InvalidArgument, "features_per_split must be in [1, d]");
    if (config.min_samples_leaf < 1) fail(ErrorCode::InvalidArgument, "min_samples_leaf must be >= 1");
    if (config.max_depth < 0) fail(ErrorCode::InvalidArgument, "max_depth must be >= 0");

    Forest forest;
    forest.variant = variant;
    forest.h = h;
    forest.levels = levels;
    forest.dim = static_cast<std::uint32_t>(samples.dim());
    forest.seed = config.seed;
    forest.trees.resize(static_cast<std::size_t>(config.n_trees));
    parallel_for(forest.trees.size(), config.threads, [&](std::size_t t) {
        forest.trees[t] = train_tree(samples, config, derive_seed(config.seed, t));
    });
    return forest;
}

double Forest::predict_proba(std::span<const double> x) const {
    if (x.size() != dim)
        fail(ErrorCode::Mismatch, "feature dimension " + std::to_string(x.size()) + " != model dimension " +
                                      std::to_string(dim));
    if (trees.empty()) fail(ErrorCode::InvalidArgument, "forest has no trees");
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(x);
    return std::clamp(sum / static_cast<double>(trees.size()), 0.0, 1.0);
}

double Forest::predict_proba(const FeatureVector& x) const {
    if (x.variant != variant)
        fail(ErrorCode::Mismatch, std::string("descriptor variant '") + to_string(x.variant) +
                                      "' does not match model variant '" + to_string(variant) + "'");
    return predict_proba(std::span<const double>(x.values));
}

// ---------------------------------------------------------------------------
// Model file
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'N', 'A', 'O', 'P', 'F', 'R', 'S', 'T'};

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* c = static_cast<const unsigned char*>(p);
        buf.insert(buf.end(), c, c + n);
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    std::vector<unsigned char> buf;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}
    void bytes(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) fail(ErrorCode::Format, "truncated model stream");
        const auto* c = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) checksum_ = (checksum_ ^ c[i]) * 0x100000001b3ULL;
    }
    std::uint32_t u32() {
        unsigned char b[4];
        bytes(b, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[i]} << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        unsigned char b[8];
        bytes(b, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::uint64_t checksum() const { return checksum_; }

private:
    std::istream& in_;
    std::uint64_t checksum_ = 0xcbf29ce484222325ULL;
};

std::uint64_t fnv1a(const std::vector<unsigned char>& buf) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : buf) h = (h ^ c) * 0x100000001b3ULL;
    return h;
}

}  // namespace

void save_model(const Forest& forest, std::ostream& out) {
    Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kModelFormatVersion);
    w.u32(static_cast<std::uint32_t>(forest.variant));
    w.u32(forest.h);
    w.u32(forest.levels);
    w.u32(forest.dim);
    w.u32(static_cast<std::uint32_t>(forest.trees.size()));
    w.u64(forest.seed);
    for (const auto& tree : forest.trees) {
        w.u32(static_cast<std::uint32_t>(tree.nodes.size()));
        for (const auto& n : tree.nodes) {
            w.i32(n.feature);
            w.f64(n.threshold);
            w.i32(n.left);
            w.i32(n.right);
            w.f64(n.active_fraction);
            w.u32(n.count);
        }
    }
    const std::uint64_t sum = fnv1a(w.buf);
    w.u64(sum);
    out.write(reinterpret_cast<const char*>(w.buf.data()), static_cast<std::streamsize>(w.buf.size()));
    if (!out) fail(ErrorCode::Io, "failed to write model");
}

Forest load_model(std::istream& in) {
    Reader r(in);
    char magic[8];
    r.bytes(magic, sizeof magic);
    if (!std::equal(magic, magic + 8, kMagic)) fail(ErrorCode::Format, "not a model file (bad magic)");
    const std::uint32_t version = r.u32();
    if (version != kModelFormatVersion)
        fail(ErrorCode::Format, "unsupported model format version " + std::to_string(version) + " (expected " +
                                    std::to_string(kModelFormatVersion) + ")");
    Forest f;
    const std::uint32_t variant = r.u32();
    if (variant > static_cast<std::uint32_t>(DescriptorVariant::AbsoluteScale))
        fail(ErrorCode::Format, "unknown descriptor variant " + std::to_string(variant));
    f.variant = static_cast<DescriptorVariant>(variant);
    f.h = r.u32();
    f.levels = r.u32();
    f.dim = r.u32();
    const std::uint32_t n_trees = r.u32();
    f.seed = r.u64();
    if (f.h < 2 || f.dim != descriptor_dimension(f.variant, f.h))
        fail(ErrorCode::Format, "model header is inconsistent (h=" + std::to_string(f.h) + ", d=" +
                                    std::to_string(f.dim) + ")");
    if (n_trees == 0 || n_trees > 100000) fail(ErrorCode::Format, "implausible tree count");
    f.trees.resize(n_trees);
    for (auto& tree : f.trees) {
        const std::uint32_t n_nodes = r.u32();
        if (n_nodes == 0 || n_nodes > (1u << 26)) fail(ErrorCode::Format, "implausible node count");
        tree.nodes.resize(n_nodes);
        for (std::uint32_t i = 0; i < n_nodes; ++i) {
            auto& n = tree.nodes[i];
            n.feature = r.i32();
            n.threshold = r.f64();
            n.left = r.i32();
            n.right = r.i32();
            n.active_fraction = r.f64();
            n.count = r.u32();
            const bool leaf_ok = n.feature == -1 && n.left == -1 && n.right == -1;
            const bool inner_ok = n.feature >= 0 && static_cast<std::uint32_t>(n.feature) < f.dim &&
                                  n.left > static_cast<std::int32_t>(i) && n.right > static_cast<std::int32_t>(i) &&
                                  static_cast<std::uint32_t>(n.left) < n_nodes &&
                                  static_cast<std::uint32_t>(n.right) < n_nodes;
            if (!(leaf_ok || inner_ok) || !(n.active_fraction >= 0.0 && n.active_fraction <= 1.0))
                fail(ErrorCode::Format, "corrupt tree node");
        }
    }
    const std::uint64_t expected = r.checksum();
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (in.gcount() != 8) fail(ErrorCode::Format, "truncated model stream");
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i) stored |= std::uint64_t{b[i]} << (8 * i);
    if (stored != expected) fail(ErrorCode::Format, "model checksum mismatch");
    return f;
}

void save_model_file(const Forest& forest, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write model file '" + path + "'");
    save_model(forest, out);
}

Forest load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open model file '" + path + "'");
    return load_model(in);
}

// ---------------------------------------------------------------------------
// Motion-magnitude threshold
// ---------------------------------------------------------------------------

double ThresholdModel::confidence(double magnitude) const {
    if (threshold <= 0) return magnitude > threshold ? 1.0 : 0.0;
    return magnitude / (magnitude + threshold);
}

ThresholdModel fit_threshold(std::span<const double> magnitudes, std::span<const std::uint8_t> labels,
                             std::uint64_t seed) {
    if (magnitudes.size() != labels.size()) fail(ErrorCode::Mismatch, "magnitude/label count mismatch");
    SampleSet all(1);
    for (std::size_t i = 0; i < magnitudes.size(); ++i) {
        if (!std::isfinite(magnitudes[i])) fail(ErrorCode::InvalidArgument, "non-finite motion magnitude");
        all.add(std::span<const double>(&magnitudes[i], 1), labels[i] != 0);
    }
    const SampleSet set = balance(all, seed);

    std::vector<std::pair<double, bool>> sorted;
    sorted.reserve(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) sorted.push_back({set.at(i, 0), set.label(i)});
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    const double n = static_cast<double>(sorted.size());
    const std::size_t total_active = set.count_active();
    // Predict active iff m > t. Scanning ascending: below-or-equal rows are predicted passive.
    ThresholdModel best;
    best.threshold = sorted.front().first;
    std::size_t passive_below = 0, active_below = 0;
    for (const auto& [m, a] : sorted) (a ? active_below : passive_below) += (m <= best.threshold);
    best.train_accuracy = (double(passive_below) + double(total_active - active_below)) / n;
    bool have_midpoint = false;

    passive_below = active_below = 0;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        (sorted[i].second ? active_below : passive_below) += 1;
        if (sorted[i].first == sorted[i + 1].first) continue;
        const double acc = (double(passive_below) + double(total_active - active_below)) / n;
        if (!have_midpoint || acc > best.train_accuracy) {
            best.threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
            // Adjacent doubles can round the midpoint up onto the upper value.
            if (!(best.threshold < sorted[i + 1].first)) best.threshold = sorted[i].first;
            best.train_accuracy = acc;
            have_midpoint = true;
        }
    }
    return best;
}

}  // namespace naop
