#include "lfshield/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "lfshield/csv.hpp"
#include "lfshield/errors.hpp"
#include "lfshield/seeding.hpp"

namespace lfshield {

std::size_t default_max_features(std::size_t dim) {
    auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dim))));
    while (k * k < dim) ++k;
    while (k > 1 && (k - 1) * (k - 1) >= dim) --k;
    return std::max<std::size_t>(k, 1);
}

double gini_from_counts(std::size_t n_benign, std::size_t n_malicious) {
    const double n = static_cast<double>(n_benign + n_malicious);
    if (n == 0.0) return 0.0;
    const double p0 = static_cast<double>(n_benign) / n;
    const double p1 = static_cast<double>(n_malicious) / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

double gini(std::span<const Label> labels) {
    const auto ones = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::Malicious));
    return gini_from_counts(labels.size() - ones, ones);
}

// ---- DecisionTree ----------------------------------------------------------

DecisionTree::DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw InvariantError("decision tree has no nodes");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (n.is_leaf()) {
            if (!(n.class_fraction >= 0.0 && n.class_fraction <= 1.0))
                throw InvariantError("leaf class fraction outside [0, 1]");
            continue;
        }
        if (n.feature < 0) throw InvariantError("negative split feature");
        if (n.left <= i || n.right <= i || n.left >= nodes_.size() || n.right >= nodes_.size())
            throw InvariantError("decision tree child link out of range");
    }
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& n = nodes_[i];
        i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[i];
}

std::size_t DecisionTree::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        best = std::max(best, d[i]);
        if (!nodes_[i].is_leaf()) {
            d[nodes_[i].left] = d[i] + 1;
            d[nodes_[i].right] = d[i] + 1;
        }
    }
    return best;
}

std::size_t DecisionTree::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

// ---- tree growing ----------------------------------------------------------

namespace {

struct SplitChoice {
    std::size_t feature = 0;
    double threshold = 0.0;
    double weighted_impurity = 0.0;  // n_left * gini_left + n_right * gini_right
};

class TreeGrower {
public:
    TreeGrower(const LabeledDataset& data, const ForestParams& params, std::uint64_t seed)
        : data_(data), params_(params), rng_(seed), dim_(data.dim()) {
        max_features_ = params.max_features == 0 ? default_max_features(dim_) : std::min(params.max_features, dim_);
        feature_order_.resize(dim_);
    }

    DecisionTree grow(std::vector<std::size_t> rows) {
        struct Work {
            std::size_t node;
            std::size_t begin;
            std::size_t end;
            std::size_t depth;
        };
        rows_ = std::move(rows);
        nodes_.assign(1, TreeNode{});
        std::vector<Work> stack{{0, 0, rows_.size(), 0}};
        while (!stack.empty()) {
            const Work w = stack.back();
            stack.pop_back();
            const auto split = find_split(w.begin, w.end, w.depth);
            if (!split) {
                make_leaf(w.node, w.begin, w.end);
                continue;
            }
            // Partition rows in place: left side first.
            const auto mid_it = std::stable_partition(
                rows_.begin() + static_cast<std::ptrdiff_t>(w.begin), rows_.begin() + static_cast<std::ptrdiff_t>(w.end),
                [&](std::size_t r) { return data_.features(r, split->feature) <= split->threshold; });
            const auto mid = static_cast<std::size_t>(mid_it - rows_.begin());

            const auto left = static_cast<std::uint32_t>(nodes_.size());
            nodes_.emplace_back();
            nodes_.emplace_back();
            auto& n = nodes_[w.node];
            n.feature = static_cast<std::int32_t>(split->feature);
            n.threshold = split->threshold;
            n.left = left;
            n.right = left + 1;
            // Right pushed first so the left subtree is expanded first.
            stack.push_back({left + 1, mid, w.end, w.depth + 1});
            stack.push_back({left, w.begin, mid, w.depth + 1});
        }
        return DecisionTree(std::move(nodes_));
    }

private:
    std::pair<std::size_t, std::size_t> count(std::size_t begin, std::size_t end) const {
        std::size_t ones = 0;
        for (std::size_t i = begin; i < end; ++i) ones += data_.labels[rows_[i]] == Label::Malicious ? 1 : 0;
        return {end - begin - ones, ones};
    }

    void make_leaf(std::size_t node, std::size_t begin, std::size_t end) {
        const auto [zeros, ones] = count(begin, end);
        auto& n = nodes_[node];
        n.feature = TreeNode::kLeaf;
        n.class_fraction = static_cast<double>(ones) / static_cast<double>(zeros + ones);
        n.label = ones > zeros ? Label::Malicious : Label::Benign;
    }

    std::optional<SplitChoice> find_split(std::size_t begin, std::size_t end, std::size_t depth) {
        const std::size_t m = end - begin;
        const auto [zeros, ones] = count(begin, end);
        if (zeros == 0 || ones == 0) return std::nullopt;
        if (m < params_.min_samples_split) return std::nullopt;
        if (params_.max_depth && depth >= *params_.max_depth) return std::nullopt;

        std::iota(feature_order_.begin(), feature_order_.end(), std::size_t{0});
        std::optional<SplitChoice> best;
        for (std::size_t k = 0; k < dim_; ++k) {
            if (k >= max_features_ && best) break;
            // Lazy Fisher-Yates: position k receives a uniformly drawn remaining feature.
            const auto j = k + uniform_index(rng_, dim_ - k);
            std::swap(feature_order_[k], feature_order_[j]);
            if (auto cand = best_threshold(feature_order_[k], begin, end, zeros, ones);
                cand && (!best || cand->weighted_impurity < best->weighted_impurity))
                best = cand;
        }
        return best;
    }

    std::optional<SplitChoice> best_threshold(std::size_t feature, std::size_t begin, std::size_t end,
                                              std::size_t zeros, std::size_t ones) {
        scratch_.clear();
        for (std::size_t i = begin; i < end; ++i) {
            const auto r = rows_[i];
            scratch_.emplace_back(data_.features(r, feature), data_.labels[r] == Label::Malicious);
        }
        std::sort(scratch_.begin(), scratch_.end());
        const std::size_t m = scratch_.size();

        std::optional<SplitChoice> best;
        std::size_t left_zeros = 0, left_ones = 0;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            (scratch_[i].second ? left_ones : left_zeros) += 1;
            const double lo = scratch_[i].first;
            const double hi = scratch_[i + 1].first;
            if (!(lo < hi)) continue;
            const std::size_t nl = i + 1;
            const std::size_t nr = m - nl;
            const double impurity = static_cast<double>(nl) * gini_from_counts(left_zeros, left_ones) +
                                    static_cast<double>(nr) * gini_from_counts(zeros - left_zeros, ones - left_ones);
            if (!best || impurity < best->weighted_impurity) {
                double threshold = lo + (hi - lo) / 2.0;
                if (!(threshold < hi)) threshold = lo;  // adjacent doubles
                best = SplitChoice{feature, threshold, impurity};
            }
        }
        return best;
    }

    const LabeledDataset& data_;
    const ForestParams& params_;
    Engine rng_;
    std::size_t dim_;
    std::size_t max_features_ = 1;
    std::vector<std::size_t> feature_order_;
    std::vector<std::size_t> rows_;
    std::vector<TreeNode> nodes_;
    std::vector<std::pair<double, bool>> scratch_;
};

void check_params(const ForestParams& params, std::size_t dim) {
    if (params.n_trees < 1) throw ArgError("forest needs at least one tree");
    if (params.max_features > dim) throw ArgError("max_features exceeds feature dimension");
    if (params.min_samples_split < 2) throw ArgError("min_samples_split must be at least 2");
}

}  // namespace

DecisionTree train_tree(const LabeledDataset& data, std::span<const std::size_t> rows, const ForestParams& params,
                        std::uint64_t tree_seed) {
    if (rows.empty()) throw ArgError("cannot train a tree on zero rows");
    if (data.dim() == 0) throw DimensionError("dataset has no features");
    check_params(params, data.dim());
    TreeGrower grower(data, params, tree_seed);
    return grower.grow(std::vector<std::size_t>(rows.begin(), rows.end()));
}

DecisionTree train_tree(const LabeledDataset& data, const ForestParams& params, std::uint64_t tree_seed) {
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return train_tree(data, rows, params, tree_seed);
}

// ---- forest ----------------------------------------------------------------

ForestModel::ForestModel(std::vector<DecisionTree> trees, ForestParams params, std::size_t feature_dim)
    : trees_(std::move(trees)), params_(params), feature_dim_(feature_dim) {
    if (trees_.size() != params_.n_trees) throw InvariantError("tree count does not match n_trees");
    if (trees_.empty()) throw InvariantError("forest has no trees");
    for (const auto& t : trees_)
        for (const auto& n : t.nodes())
            if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= feature_dim_)
                throw InvariantError("split feature exceeds forest feature dimension");
}

ForestModel train_forest(const LabeledDataset& train, const ForestParams& params, unsigned threads) {
    if (train.empty()) throw ArgError("cannot train a forest on an empty dataset");
    check_params(params, train.dim());
    ForestParams resolved = params;
    if (resolved.max_features == 0) resolved.max_features = default_max_features(train.dim());

    std::vector<DecisionTree> trees(resolved.n_trees);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        std::vector<std::size_t> rows(train.size());
        for (std::size_t t = next++; t < resolved.n_trees; t = next++) {
            const std::uint64_t seed = derive_seed(resolved.seed, t);
            if (resolved.bootstrap) {
                Engine rng(derive_seed(seed, "bootstrap"));
                for (auto& r : rows) r = uniform_index(rng, train.size());
            } else {
                std::iota(rows.begin(), rows.end(), std::size_t{0});
            }
            trees[t] = train_tree(train, rows, resolved, seed);
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, resolved.n_trees));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    return ForestModel(std::move(trees), resolved, train.dim());
}

namespace {
void check_dim(const ForestModel& model, std::size_t dim) {
    if (dim != model.feature_dim())
        throw DimensionError("query has " + std::to_string(dim) + " features, model expects " +
                             std::to_string(model.feature_dim()));
}
}  // namespace

Label predict_class(const ForestModel& model, std::span<const double> x) {
    check_dim(model, x.size());
    std::size_t votes = 0;
    double fraction_sum = 0.0;
    for (const auto& tree : model.trees()) {
        const auto& leaf = tree.leaf_for(x);
        votes += leaf.label == Label::Malicious ? 1 : 0;
        fraction_sum += leaf.class_fraction;
    }
    const std::size_t t = model.trees().size();
    if (2 * votes > t) return Label::Malicious;
    if (2 * votes < t) return Label::Benign;
    return fraction_sum / static_cast<double>(t) > 0.5 ? Label::Malicious : Label::Benign;
}

double predict_value(const ForestModel& model, std::span<const double> x) {
    check_dim(model, x.size());
    double sum = 0.0;
    for (const auto& tree : model.trees()) sum += tree.predict_value(x);
    return std::clamp(sum / static_cast<double>(model.trees().size()), 0.0, 1.0);
}

std::vector<Label> predict_classes(const ForestModel& model, const FeatureMatrix& x) {
    check_dim(model, x.cols());
    std::vector<Label> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict_class(model, x.row(i));
    return out;
}

double accuracy_against(const ForestModel& model, const FeatureMatrix& x, std::span<const Label> labels) {
    if (labels.size() != x.rows()) throw LengthError("label count does not match row count");
    if (labels.empty()) throw LengthError("accuracy of an empty set is undefined");
    const auto preds = predict_classes(model, x);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == labels[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double accuracy(const ForestModel& model, const LabeledDataset& ds) {
    return accuracy_against(model, ds.features, ds.labels);
}

// ---- serialization ---------------------------------------------------------

namespace {
constexpr const char* kMagic = "lfshield-forest";
constexpr int kVersion = 1;

[[noreturn]] void bad_model(const std::string& why) { throw SchemaError("model file: " + why); }

template <typename T>
T read_field(std::istream& in, const char* key) {
    std::string k;
    T value{};
    if (!(in >> k) || k != key || !(in >> value)) bad_model(std::string("expected '") + key + "'");
    return value;
}

double read_real(std::istream& in) {
    std::string tok;
    if (!(in >> tok)) bad_model("truncated real");
    const auto v = csv::parse_double(tok);
    if (!v) bad_model("bad real '" + tok + "'");
    return *v;
}
}  // namespace

std::string serialize_model(const ForestModel& model) {
    std::ostringstream out;
    const auto& p = model.params();
    out << kMagic << " v" << kVersion << '\n';
    out << "feature_dim " << model.feature_dim() << '\n';
    out << "n_trees " << p.n_trees << '\n';
    out << "max_features " << p.max_features << '\n';
    out << "max_depth " << (p.max_depth ? std::to_string(*p.max_depth) : std::string("unlimited")) << '\n';
    out << "min_samples_split " << p.min_samples_split << '\n';
    out << "bootstrap " << (p.bootstrap ? 1 : 0) << '\n';
    out << "seed " << p.seed << '\n';
    for (std::size_t t = 0; t < model.trees().size(); ++t) {
        const auto& nodes = model.trees()[t].nodes();
        out << "tree " << t << ' ' << nodes.size() << '\n';
        for (const auto& n : nodes) {
            if (n.is_leaf())
                out << "leaf " << as_int(n.label) << ' ' << csv::format_double(n.class_fraction) << '\n';
            else
                out << "split " << n.feature << ' ' << csv::format_double(n.threshold) << ' ' << n.left << ' ' << n.right
                    << '\n';
        }
    }
    out << "end\n";
    return out.str();
}

ForestModel deserialize_model(const std::string& text) {
    std::istringstream in(text);
    std::string magic, version;
    if (!(in >> magic >> version) || magic != kMagic) bad_model("not an lfshield forest");
    if (version != "v" + std::to_string(kVersion)) bad_model("unsupported version '" + version + "'");

    ForestParams p;
    const auto dim = read_field<std::size_t>(in, "feature_dim");
    p.n_trees = read_field<std::size_t>(in, "n_trees");
    p.max_features = read_field<std::size_t>(in, "max_features");
    const auto depth = read_field<std::string>(in, "max_depth");
    if (depth != "unlimited") {
        const auto d = csv::parse_integer(depth);
        if (!d || *d < 0) bad_model("bad max_depth");
        p.max_depth = static_cast<std::size_t>(*d);
    }
    p.min_samples_split = read_field<std::size_t>(in, "min_samples_split");
    p.bootstrap = read_field<int>(in, "bootstrap") != 0;
    p.seed = read_field<std::uint64_t>(in, "seed");

    std::vector<DecisionTree> trees;
    for (std::size_t t = 0; t < p.n_trees; ++t) {
        std::string tag;
        std::size_t index = 0, count = 0;
        if (!(in >> tag >> index >> count) || tag != "tree" || index != t || count == 0) bad_model("bad tree header");
        std::vector<TreeNode> nodes(count);
        for (auto& n : nodes) {
            std::string kind;
            if (!(in >> kind)) bad_model("truncated tree");
            if (kind == "leaf") {
                int lab = 0;
                if (!(in >> lab) || (lab != 0 && lab != 1)) bad_model("bad leaf label");
                n.label = static_cast<Label>(lab);
                n.class_fraction = read_real(in);
            } else if (kind == "split") {
                if (!(in >> n.feature)) bad_model("bad split feature");
                n.threshold = read_real(in);
                if (!(in >> n.left >> n.right)) bad_model("bad child links");
            } else {
                bad_model("unknown node kind '" + kind + "'");
            }
        }
        try {
            trees.emplace_back(std::move(nodes));
        } catch (const InvariantError& e) {
            bad_model(e.what());
        }
    }
    std::string end;
    if (!(in >> end) || end != "end") bad_model("missing end marker");
    try {
        return ForestModel(std::move(trees), p, dim);
    } catch (const InvariantError& e) {
        bad_model(e.what());
    }
}

void save_model(const ForestModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << serialize_model(model);
    if (!out) throw IoError("write error on '" + path.string() + "'");
}

ForestModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_model(buf.str());
}

}  // namespace lfshield
