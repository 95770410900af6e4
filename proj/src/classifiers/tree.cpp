#include <algorithm>
#include <cmath>
#include <numeric>

#include "internal.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/random.hpp"

namespace metacomment::classifiers {

namespace {

double gini(double pos, double total) {
    if (total <= 0) return 0;
    const double p = pos / total;
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

class TreeGrower {
public:
    TreeGrower(const Matrix& x, std::span<const int> y, std::span<const double> w, const TreeHyperparams& p)
        : x_(x), y_(y), w_(w), p_(p), rng_(p.seed) {}

    Tree grow(std::vector<std::size_t> rows) {
        build(rows, 0);
        return Tree{std::move(nodes_)};
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0;
        double impurity = 0;
        std::size_t n_left = 0;
    };

    double weight(std::size_t r) const { return w_.empty() ? 1.0 : w_[r]; }

    std::vector<int> candidate_features() {
        const int d = static_cast<int>(x_.cols());
        std::vector<int> f(static_cast<std::size_t>(d));
        std::iota(f.begin(), f.end(), 0);
        if (p_.max_features > 0 && p_.max_features < d) {
            for (int i = 0; i < p_.max_features; ++i) {
                const auto j = static_cast<std::size_t>(i) + rng_.below(static_cast<std::uint64_t>(d - i));
                std::swap(f[static_cast<std::size_t>(i)], f[j]);
            }
            f.resize(static_cast<std::size_t>(p_.max_features));
            std::sort(f.begin(), f.end());
        }
        return f;
    }

    int build(std::vector<std::size_t>& rows, int depth) {
        double pos = 0, total = 0;
        for (auto r : rows) {
            total += weight(r);
            if (y_[r]) pos += weight(r);
        }
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back(TreeNode{-1, 0, -1, -1, total > 0 ? pos / total : 0.5});
        const std::size_t min_leaf = static_cast<std::size_t>(p_.min_leaf);
        if (depth >= p_.max_depth || rows.size() < 2 * min_leaf || pos <= 0 || pos >= total) return id;

        const double parent = gini(pos, total) * total;
        Split best;
        best.impurity = parent;
        std::vector<std::size_t> order = rows;
        for (int f : candidate_features()) {
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return x_(a, f) < x_(b, f); });
            double lpos = 0, ltot = 0;
            for (std::size_t k = 1; k < order.size(); ++k) {
                const std::size_t r = order[k - 1];
                ltot += weight(r);
                if (y_[r]) lpos += weight(r);
                const double a = x_(r, f), b = x_(order[k], f);
                if (!(a < b) || k < min_leaf || order.size() - k < min_leaf) continue;
                const double imp = gini(lpos, ltot) * ltot + gini(pos - lpos, total - ltot) * (total - ltot);
                if (imp < best.impurity - 1e-12 * total) {
                    double mid = a + (b - a) / 2.0;
                    if (!(mid < b)) mid = a;
                    best = Split{f, mid, imp, k};
                }
            }
        }
        if (best.feature < 0) return id;

        std::vector<std::size_t> left, right;
        for (auto r : rows) (x_(r, best.feature) <= best.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        nodes_[id].feature = best.feature;
        nodes_[id].threshold = best.threshold;
        const int l = build(left, depth + 1);
        nodes_[id].left = l;
        const int rgt = build(right, depth + 1);
        nodes_[id].right = rgt;
        return id;
    }

    const Matrix& x_;
    std::span<const int> y_;
    std::span<const double> w_;
    TreeHyperparams p_;
    Rng rng_;
    std::vector<TreeNode> nodes_;
};

void check_training_set(const Matrix& x, std::span<const int> y) {
    if (x.rows() == 0) throw InvalidArgument("empty training set");
    if (y.size() != static_cast<std::size_t>(x.rows())) throw InvalidArgument("one label per training row");
    const auto pos = std::count(y.begin(), y.end(), 1);
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(y.size())) {
        throw InvalidArgument("both classes must be present in the training set");
    }
}

}  // namespace

double Tree::probability(std::span<const double> x) const {
    if (nodes.empty()) throw StateError("empty tree");
    int n = 0;
    while (nodes[n].feature >= 0) {
        n = x[static_cast<std::size_t>(nodes[n].feature)] <= nodes[n].threshold ? nodes[n].left : nodes[n].right;
    }
    return nodes[n].value;
}

Tree train_tree(const Matrix& x, std::span<const int> y, std::span<const double> weights, const TreeHyperparams& p) {
    validate(p);
    if (x.rows() == 0) throw InvalidArgument("empty training set");
    if (!weights.empty() && weights.size() != y.size()) throw InvalidArgument("one weight per training row");
    std::vector<std::size_t> rows(static_cast<std::size_t>(x.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    return TreeGrower(x, y, weights, p).grow(std::move(rows));
}

Forest train_forest(const Matrix& x, std::span<const int> y, const ForestHyperparams& p) {
    validate(p);
    check_training_set(x, y);
    const auto n = static_cast<std::uint64_t>(x.rows());
    TreeHyperparams tp;
    tp.max_depth = p.max_depth;
    tp.min_leaf = p.min_leaf;
    tp.max_features = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(x.cols())))));
    Forest forest;
    for (int t = 0; t < p.n_trees; ++t) {
        const std::uint64_t seed = derive_seed(p.seed, static_cast<std::uint64_t>(t));
        Rng rng(derive_seed(seed, "bootstrap"));
        std::vector<std::size_t> rows(n);
        for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
        std::sort(rows.begin(), rows.end());
        tp.seed = derive_seed(seed, "features");
        forest.trees.push_back(TreeGrower(x, y, {}, tp).grow(std::move(rows)));
    }
    return forest;
}

Boost train_boost(const Matrix& x, std::span<const int> y, const AdaBoostHyperparams& p) {
    validate(p);
    check_training_set(x, y);
    const std::size_t n = y.size();
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    TreeHyperparams stump;
    stump.max_depth = 1;
    stump.min_leaf = 1;
    Boost boost;
    std::vector<bool> wrong(n);
    for (int m = 0; m < p.n_estimators; ++m) {
        Tree t = train_tree(x, y, w, stump);
        double err = 0, total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const int h = t.probability(std::span<const double>(x.row(static_cast<Eigen::Index>(i)).data(),
                                                                static_cast<std::size_t>(x.cols()))) >= 0.5;
            wrong[i] = h != y[i];
            total += w[i];
            if (wrong[i]) err += w[i];
        }
        err /= total;
        if (err <= 0.0) {
            boost.stumps.push_back(std::move(t));
            boost.alphas.push_back(1.0);
            break;
        }
        if (err >= 0.5) {
            if (boost.stumps.empty()) {
                boost.stumps.push_back(std::move(t));
                boost.alphas.push_back(1.0);
            }
            break;
        }
        const double alpha = p.learning_rate * std::log((1.0 - err) / err);
        double sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (wrong[i]) w[i] *= std::exp(alpha);
            sum += w[i];
        }
        for (auto& v : w) v /= sum;
        boost.stumps.push_back(std::move(t));
        boost.alphas.push_back(alpha);
    }
    return boost;
}

double forest_decision(const Forest& f, std::span<const double> x) {
    double p = 0;
    for (const auto& t : f.trees) p += t.probability(x);
    return p / static_cast<double>(f.trees.size()) - 0.5;
}

double boost_decision(const Boost& b, std::span<const double> x) {
    double s = 0, total = 0;
    for (std::size_t m = 0; m < b.stumps.size(); ++m) {
        s += b.alphas[m] * (b.stumps[m].probability(x) >= 0.5 ? 1.0 : -1.0);
        total += b.alphas[m];
    }
    return s / total;
}

double knn_decision(const KnnModel& m, std::span<const double> x) {
    const auto n = static_cast<std::size_t>(m.points.rows());
    const Eigen::Map<const Eigen::RowVectorXd> q(x.data(), static_cast<Eigen::Index>(x.size()));
    std::vector<std::pair<double, std::size_t>> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = {(m.points.row(static_cast<Eigen::Index>(i)) - q).squaredNorm(), i};
    const std::size_t k = std::min(n, static_cast<std::size_t>(m.k));
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    double pos = 0;
    for (std::size_t i = 0; i < k; ++i) pos += m.labels[d[i].second];
    return pos / static_cast<double>(k) - 0.5;
}

}  // namespace metacomment::classifiers
