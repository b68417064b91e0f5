#include "internal.hpp"

#include "quantsig/error.hpp"
#include "quantsig/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace quantsig::models {

double TreeModel::evaluate(std::span<const double> row) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].value;
}

bool TreeModel::is_valid() const {
    if (nodes.empty()) return false;
    std::vector<int> refs(nodes.size(), 0);
    for (const auto& n : nodes) {
        if (n.feature < 0) continue;
        if (static_cast<std::size_t>(n.feature) >= n_features) return false;
        for (auto child : {n.left, n.right}) {
            if (child <= 0 || static_cast<std::size_t>(child) >= nodes.size()) return false;
            ++refs[static_cast<std::size_t>(child)];
        }
    }
    if (refs[0] != 0) return false;
    for (std::size_t i = 1; i < refs.size(); ++i) {
        if (refs[i] != 1) return false;
    }
    // Preorder layout puts children after parents, which rules out cycles.
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        if (n.feature >= 0 && (static_cast<std::size_t>(n.left) <= i || static_cast<std::size_t>(n.right) <= i))
            return false;
    }
    return true;
}

namespace detail {
namespace {

/// Per-feature row order by (value, row), computed once per fit.
struct SortedIndex {
    std::vector<std::vector<std::uint32_t>> rows_by_feature;
};

SortedIndex presort(const Matrix& x) {
    SortedIndex idx;
    idx.rows_by_feature.resize(x.cols());
    for (std::size_t f = 0; f < x.cols(); ++f) {
        auto& order = idx.rows_by_feature[f];
        order.resize(x.rows());
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
    }
    return idx;
}

class Builder {
public:
    Builder(const Matrix& x, std::span<const double> targets, std::span<const std::size_t> sample_rows,
            const TreeParams& params, std::uint64_t seed, const SortedIndex& index)
        : x_(x), targets_(targets), rows_(sample_rows), params_(params), rng_(seed) {
        const std::size_t m = sample_rows.size();
        const std::size_t f_count = x.cols();
        // Expand the global order into slot order, keeping bootstrap copies adjacent.
        std::vector<std::uint32_t> slot_start(x.rows() + 1, 0);
        for (auto r : sample_rows) ++slot_start[r + 1];
        for (std::size_t r = 0; r < x.rows(); ++r) slot_start[r + 1] += slot_start[r];
        std::vector<std::uint32_t> slots_of_row(m);
        {
            std::vector<std::uint32_t> fill(slot_start.begin(), slot_start.end() - 1);
            for (std::size_t s = 0; s < m; ++s) slots_of_row[fill[sample_rows[s]]++] = static_cast<std::uint32_t>(s);
        }
        sorted_.resize(f_count);
        for (std::size_t f = 0; f < f_count; ++f) {
            auto& out = sorted_[f];
            out.reserve(m);
            for (auto r : index.rows_by_feature[f]) {
                for (auto k = slot_start[r]; k < slot_start[r + 1]; ++k) out.push_back(slots_of_row[k]);
            }
        }
        slot_target_.resize(m);
        for (std::size_t s = 0; s < m; ++s) slot_target_[s] = targets[sample_rows[s]];
        goes_left_.resize(m);
        scratch_.resize(m);
        features_.resize(f_count);
        std::iota(features_.begin(), features_.end(), 0u);
    }

    TreeModel build() {
        TreeModel tree;
        tree.n_features = x_.cols();
        nodes_ = &tree.nodes;
        grow(0, rows_.size(), 0);
        return tree;
    }

private:
    double value_at(std::uint32_t slot, std::size_t f) const { return x_(rows_[slot], f); }

    std::int32_t grow(std::size_t lo, std::size_t hi, int depth) {
        const std::size_t m = hi - lo;
        const auto id = static_cast<std::int32_t>(nodes_->size());
        nodes_->emplace_back();

        double sum = 0.0;
        for (std::size_t i = lo; i < hi; ++i) sum += slot_target_[sorted_[0][i]];
        {
            auto& node = (*nodes_)[static_cast<std::size_t>(id)];
            if (params_.classification) {
                node.count1 = sum;
                node.count0 = static_cast<double>(m) - sum;
            } else {
                node.count0 = static_cast<double>(m);
            }
            node.value = m ? sum / static_cast<double>(m) : 0.0;
        }

        const auto msl = static_cast<std::size_t>(std::max(1, params_.min_samples_leaf));
        const bool pure = params_.classification && (sum == 0.0 || sum == static_cast<double>(m));
        if (depth >= params_.max_depth || m < 2 * msl || pure) return id;

        const auto split = find_split(lo, hi, sum, msl);
        if (!split.found) return id;

        // Partition every feature's slot range so both children stay sorted.
        const auto& order = sorted_[split.feature];
        for (std::size_t i = lo; i < hi; ++i) goes_left_[order[i]] = (i - lo) < split.n_left;
        for (auto& column : sorted_) {
            std::size_t l = lo;
            std::size_t r = 0;
            for (std::size_t i = lo; i < hi; ++i) {
                const auto s = column[i];
                if (goes_left_[s]) column[l++] = s;
                else scratch_[r++] = s;
            }
            std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r),
                      column.begin() + static_cast<std::ptrdiff_t>(l));
        }

        const std::size_t mid = lo + split.n_left;
        const auto left = grow(lo, mid, depth + 1);
        const auto right = grow(mid, hi, depth + 1);
        auto& node = (*nodes_)[static_cast<std::size_t>(id)];
        node.feature = static_cast<std::int32_t>(split.feature);
        node.threshold = split.threshold;
        node.left = left;
        node.right = right;
        return id;
    }

    struct Split {
        bool found = false;
        std::size_t feature = 0;
        double threshold = 0.0;
        std::size_t n_left = 0;
    };

    // Impurity decrease is maximised through the equivalent "purity" score:
    // classification sum_k n_k^2 / n per side (Gini), regression s^2 / n (SSE).
    Split find_split(std::size_t lo, std::size_t hi, double total, std::size_t msl) {
        const std::size_t m = hi - lo;
        const double n = static_cast<double>(m);
        auto purity = [&](double s, double cnt) {
            if (params_.classification) {
                const double zeros = cnt - s;
                return (s * s + zeros * zeros) / cnt;
            }
            return s * s / cnt;
        };
        const double parent = purity(total, n);
        double best = parent + 1e-12 * std::fabs(parent) + 1e-12;

        std::size_t n_candidates = features_.size();
        if (params_.max_features > 0 && static_cast<std::size_t>(params_.max_features) < features_.size()) {
            n_candidates = static_cast<std::size_t>(params_.max_features);
            std::iota(features_.begin(), features_.end(), 0u);
            for (std::size_t i = 0; i < n_candidates; ++i) {
                const auto j = i + static_cast<std::size_t>(rng_.below(features_.size() - i));
                std::swap(features_[i], features_[j]);
            }
            std::sort(features_.begin(), features_.begin() + static_cast<std::ptrdiff_t>(n_candidates));
        }

        Split best_split;
        for (std::size_t c = 0; c < n_candidates; ++c) {
            const std::size_t f = features_[c];
            const auto& order = sorted_[f];
            double left_sum = 0.0;
            for (std::size_t i = lo; i + 1 < hi; ++i) {
                left_sum += slot_target_[order[i]];
                const std::size_t nl = i - lo + 1;
                if (nl < msl) continue;
                if (m - nl < msl) break;
                const double a = value_at(order[i], f);
                const double b = value_at(order[i + 1], f);
                if (!(a < b)) continue;
                const double score = purity(left_sum, static_cast<double>(nl)) +
                                     purity(total - left_sum, static_cast<double>(m - nl));
                if (score > best) {
                    best = score;
                    double thr = a + (b - a) / 2.0;
                    if (!(thr < b)) thr = a;
                    best_split = {true, f, thr, nl};
                }
            }
        }
        return best_split;
    }

    const Matrix& x_;
    std::span<const double> targets_;
    std::span<const std::size_t> rows_;
    TreeParams params_;
    CounterRng rng_;
    std::vector<std::vector<std::uint32_t>> sorted_;
    std::vector<double> slot_target_;
    std::vector<char> goes_left_;
    std::vector<std::uint32_t> scratch_;
    std::vector<std::uint32_t> features_;
    std::vector<TreeNode>* nodes_ = nullptr;
};

TreeModel build_with_index(const Matrix& x, std::span<const double> targets,
                           std::span<const std::size_t> sample_rows, const TreeParams& params,
                           std::uint64_t seed, const SortedIndex& index) {
    if (sample_rows.empty()) throw Error(Errc::InvalidArgument, "tree needs at least one sample");
    Builder b(x, targets, sample_rows, params, seed, index);
    return b.build();
}

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

}  // namespace

TreeModel build_tree(const Matrix& x, std::span<const double> targets, std::span<const std::size_t> sample_rows,
                     const TreeParams& params, std::uint64_t seed) {
    return build_with_index(x, targets, sample_rows, params, seed, presort(x));
}

TreeModel fit_decision_tree(const Matrix& x, std::span<const int> y, const TrainConfig& cfg) {
    const auto r = resolve(cfg, ClassifierFamily::dt);
    const std::vector<double> targets(y.begin(), y.end());
    const auto rows = all_rows(x.rows());
    return build_tree(x, targets, rows, {true, r.max_depth, cfg.min_samples_leaf, cfg.max_features}, cfg.seed);
}

ForestModel fit_random_forest(const Matrix& x, std::span<const int> y, const TrainConfig& cfg) {
    const auto r = resolve(cfg, ClassifierFamily::rf);
    if (cfg.n_trees < 1) throw Error(Errc::InvalidArgument, "n_trees must be >= 1");
    const std::vector<double> targets(y.begin(), y.end());
    const auto index = presort(x);
    int mtry = cfg.max_features;
    if (mtry <= 0) mtry = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(x.cols())))));
    const TreeParams params{true, r.max_depth, cfg.min_samples_leaf, mtry};

    ForestModel forest;
    for (int t = 0; t < cfg.n_trees; ++t) {
        const std::uint64_t tree_seed = cfg.seed ^ static_cast<std::uint64_t>(t);
        CounterRng rng(tree_seed);
        std::vector<std::size_t> rows;
        if (cfg.bootstrap) {
            CounterRng draw = rng.split(0);
            rows.resize(x.rows());
            for (auto& row : rows) row = static_cast<std::size_t>(draw.below(x.rows()));
        } else {
            rows = all_rows(x.rows());
        }
        forest.trees.push_back(build_with_index(x, targets, rows, params, tree_seed, index));
        forest.seeds.push_back(tree_seed);
    }
    return forest;
}

GbtModel fit_gradient_boosting(const Matrix& x, std::span<const int> y, const TrainConfig& cfg) {
    const auto r = resolve(cfg, ClassifierFamily::xgb);
    if (cfg.n_rounds < 1) throw Error(Errc::InvalidArgument, "n_rounds must be >= 1");
    const std::size_t n = x.rows();
    const double p = static_cast<double>(std::count(y.begin(), y.end(), 1)) / static_cast<double>(n);
    GbtModel model;
    model.learning_rate = r.learning_rate;
    model.initial_log_odds = std::log(p / (1.0 - p));

    const auto index = presort(x);
    const auto rows = all_rows(n);
    const TreeParams params{false, r.max_depth, cfg.min_samples_leaf, 0};
    std::vector<double> f(n, model.initial_log_odds), residual(n);
    for (int round = 0; round < cfg.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) residual[i] = static_cast<double>(y[i]) - sigmoid(f[i]);
        auto tree = build_with_index(x, residual, rows, params, cfg.seed, index);
        for (std::size_t i = 0; i < n; ++i) f[i] += model.learning_rate * tree.evaluate(x.row(i));
        model.trees.push_back(std::move(tree));
    }
    return model;
}

}  // namespace detail

TreeModel fit_regression_tree(const Matrix& x, std::span<const double> targets, int max_depth,
                              int min_samples_leaf) {
    if (targets.size() != x.rows()) throw Error(Errc::ShapeMismatch, "target count differs from row count");
    const auto rows = detail::all_rows(x.rows());
    return detail::build_tree(x, targets, rows, {false, max_depth, min_samples_leaf, 0}, 0);
}

}  // namespace quantsig::models
