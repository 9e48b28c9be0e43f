#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lfshield/dataset.hpp"

namespace lfshield {

struct ForestParams {
    std::size_t n_trees = 100;
    std::size_t max_features = 0;            // 0 selects ceil(sqrt(dim)) at training time
    std::optional<std::size_t> max_depth;    // nullopt: grow until pure
    std::size_t min_samples_split = 2;
    bool bootstrap = true;
    std::uint64_t seed = 0;

    bool operator==(const ForestParams&) const = default;
};

/// ceil(sqrt(dim)), at least 1.
std::size_t default_max_features(std::size_t dim);

/// Gini impurity 1 - p0^2 - p1^2 of a binary label multiset.
double gini(std::span<const Label> labels);
double gini_from_counts(std::size_t n_benign, std::size_t n_malicious);

struct TreeNode {
    static constexpr std::int32_t kLeaf = -1;

    std::int32_t feature = kLeaf;  // split feature, or kLeaf
    double threshold = 0.0;        // rows with x[feature] <= threshold go left
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    Label label = Label::Benign;   // leaves only
    double class_fraction = 0.0;   // leaves only: share of label-1 training rows

    bool is_leaf() const noexcept { return feature == kLeaf; }
    bool operator==(const TreeNode&) const = default;
};

/// Binary decision tree stored as a flat node array; node 0 is the root.
class DecisionTree {
public:
    DecisionTree() = default;
    /// Throws InvariantError if child links are out of range or not forward.
    explicit DecisionTree(std::vector<TreeNode> nodes);

    const TreeNode& leaf_for(std::span<const double> x) const;
    Label predict(std::span<const double> x) const { return leaf_for(x).label; }
    double predict_value(std::span<const double> x) const { return leaf_for(x).class_fraction; }

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    std::size_t depth() const;
    std::size_t leaf_count() const;

    bool operator==(const DecisionTree&) const = default;

private:
    std::vector<TreeNode> nodes_;
};

/// Grows one tree on `rows` of `data` (duplicates allowed, as produced by
/// bootstrapping). At each node `max_features` features are drawn without
/// replacement and the midpoint threshold minimising weighted child Gini is
/// taken; if every drawn feature is constant on the node, the remaining
/// features are tried in draw order before giving up.
DecisionTree train_tree(const LabeledDataset& data, std::span<const std::size_t> rows, const ForestParams& params,
                        std::uint64_t tree_seed);
DecisionTree train_tree(const LabeledDataset& data, const ForestParams& params, std::uint64_t tree_seed);

class ForestModel {
public:
    ForestModel() = default;
    ForestModel(std::vector<DecisionTree> trees, ForestParams params, std::size_t feature_dim);

    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
    const ForestParams& params() const noexcept { return params_; }
    std::size_t feature_dim() const noexcept { return feature_dim_; }

    bool operator==(const ForestModel&) const = default;

private:
    std::vector<DecisionTree> trees_;
    ForestParams params_;
    std::size_t feature_dim_ = 0;
};

/// Tree t is trained on a bootstrap resample drawn with seed
/// derive_seed(params.seed, t), so results do not depend on `threads`
/// (0 = hardware concurrency).
ForestModel train_forest(const LabeledDataset& train, const ForestParams& params, unsigned threads = 0);

/// Majority vote. An even split is broken by the mean leaf class fraction,
/// and an exact 0.5 there yields label 0.
Label predict_class(const ForestModel& model, std::span<const double> x);

/// Mean of the trees' leaf class fractions; always in [0, 1].
double predict_value(const ForestModel& model, std::span<const double> x);

std::vector<Label> predict_classes(const ForestModel& model, const FeatureMatrix& x);

/// Share of rows whose prediction equals `labels` (which may differ from ds.labels).
double accuracy_against(const ForestModel& model, const FeatureMatrix& x, std::span<const Label> labels);
double accuracy(const ForestModel& model, const LabeledDataset& ds);

/// Versioned line-oriented text format; reals use shortest round-trip form.
std::string serialize_model(const ForestModel& model);
ForestModel deserialize_model(const std::string& text);
void save_model(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_model(const std::filesystem::path& path);

}  // namespace lfshield
