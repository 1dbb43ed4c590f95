#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "naop/descriptors.hpp"

namespace naop {

/// Row-major feature matrix with binary labels (1 = active).
class SampleSet {
public:
    SampleSet() = default;
    explicit SampleSet(std::size_t dim) : dim_(dim) {}

    void add(std::span<const double> x, bool active);
    void add(const FeatureVector& x, bool active) { add(x.values, active); }

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
    double at(std::size_t i, std::size_t feature) const { return values_[i * dim_ + feature]; }
    bool label(std::size_t i) const { return labels_[i] != 0; }
    void set_label(std::size_t i, bool active) { labels_[i] = active ? 1 : 0; }
    std::size_t count_active() const;

    /// New set holding the given rows in order.
    SampleSet subset(std::span<const std::size_t> rows) const;

private:
    std::size_t dim_ = 0;
    std::vector<double> values_;
    std::vector<std::uint8_t> labels_;
};

/// Keeps every active sample and a seeded uniform subset of passives of the same
/// size. Actives are never subsampled: with fewer passives the set is returned
/// unchanged and a warning is emitted. Row order is actives then passives, each
/// in original order.
SampleSet balance(const SampleSet& samples, std::uint64_t seed);

struct TrainConfig {
    int n_trees = 25;
    int max_depth = 0;           // 0 = unbounded
    int features_per_split = 0;  // 0 = ceil(sqrt(d))
    bool bootstrap = true;
    int min_samples_leaf = 1;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // x[feature] <= threshold goes left
    std::int32_t left = -1;
    std::int32_t right = -1;
    double active_fraction = 0.0;
    std::uint32_t count = 0;

    bool is_leaf() const { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Nodes in preorder; node 0 is the root.
struct DecisionTree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> x) const;
    std::size_t depth() const;
    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct Forest {
    std::vector<DecisionTree> trees;
    DescriptorVariant variant = DescriptorVariant::Full;
    std::uint32_t h = 0;       // boxes per described trajectory
    std::uint32_t levels = 0;  // > 0 when trained on temporal-pyramid encodings
    std::uint32_t dim = 0;
    std::uint64_t seed = 0;

    /// Mean of the leaf active fractions over all trees.
    double predict_proba(std::span<const double> x) const;
    double predict_proba(const FeatureVector& x) const;

    friend bool operator==(const Forest&, const Forest&) = default;
};

struct SplitChoice {
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity = 0.0;  // size-weighted Gini of the two children
};

/// Best Gini split of `rows` over `features`. Candidate thresholds are the
/// midpoints between consecutive distinct values; ties go to the earlier
/// feature in `features`, then to the smaller threshold. Nothing when no
/// candidate leaves min_samples_leaf rows on both sides.
std::optional<SplitChoice> best_gini_split(const SampleSet& samples, std::span<const std::size_t> rows,
                                           std::span<const std::size_t> features, std::size_t min_samples_leaf);

DecisionTree train_tree(const SampleSet& samples, const TrainConfig& config, std::uint64_t tree_seed);

/// Trees are grown independently from seeds derived from config.seed, so the
/// result does not depend on config.threads.
Forest train(const SampleSet& samples, const TrainConfig& config, DescriptorVariant variant, std::uint32_t h,
             std::uint32_t levels = 0);

inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const Forest& forest, std::ostream& out);
Forest load_model(std::istream& in);
void save_model_file(const Forest& forest, const std::string& path);
Forest load_model_file(const std::string& path);

/// Motion-magnitude classifier: active iff magnitude > threshold.
struct ThresholdModel {
    double threshold = 0.0;
    double train_accuracy = 0.0;

    bool is_active(double magnitude) const { return magnitude > threshold; }
    /// Monotone map of the magnitude onto [0, 1] that crosses 0.5 at the threshold.
    double confidence(double magnitude) const;
};

ThresholdModel fit_threshold(std::span<const double> magnitudes, std::span<const std::uint8_t> labels,
                             std::uint64_t seed);

}  // namespace naop
