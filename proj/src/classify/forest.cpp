#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <thread>

#include "morpho/classify.hpp"
#include "morpho/error.hpp"
#include "morpho/random.hpp"

namespace morpho::classify {

int ForestParams::mtry(int n_features) const {
    if (features_per_split) return *features_per_split;
    return std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_features)))));
}

void ForestParams::validate(int n_features) const {
    if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
    if (min_leaf < 1) throw ConfigError("min_leaf must be >= 1");
    if (max_depth && *max_depth < 0) throw ConfigError("max_depth must be >= 0");
    const int m = mtry(n_features);
    if (m < 1 || m > n_features) throw ConfigError("features_per_split must lie in [1, p]");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
    if (threads < 1) throw ConfigError("threads must be >= 1");
}

int Tree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].leaf()) {
        const Node& n = nodes[static_cast<std::size_t>(i)];
        i = row(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].label;
}

int Forest::predict_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    if (row.size() != n_features) throw DimensionError("row has the wrong number of features");
    std::vector<int> votes(classes.size(), 0);
    for (const auto& t : trees) ++votes[static_cast<std::size_t>(t.predict(row))];
    return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

std::string Forest::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    return classes[static_cast<std::size_t>(predict_index(row))];
}

std::vector<std::string> Forest::predict_all(const Eigen::MatrixXd& m) const {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(predict(m.row(r)));
    return out;
}

bool operator==(const Forest& a, const Forest& b) {
    if (a.classes != b.classes || a.n_features != b.n_features || a.importance != b.importance ||
        a.trees.size() != b.trees.size())
        return false;
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
        const auto& x = a.trees[t].nodes;
        const auto& y = b.trees[t].nodes;
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i].feature != y[i].feature || x[i].threshold != y[i].threshold || x[i].left != y[i].left ||
                x[i].right != y[i].right || x[i].label != y[i].label)
                return false;
        }
    }
    return true;
}

namespace {

struct TreeBuilder {
    const Eigen::MatrixXd& x;
    const std::vector<int>& y;
    int n_classes;
    const ForestParams& params;
    int mtry;
    Rng rng;
    Tree tree;
    std::vector<double> importance;  // summed weighted impurity decrease

    static double gini(const std::vector<int>& counts, int total) {
        if (total == 0) return 0.0;
        double acc = 0.0;
        for (int c : counts) {
            const double p = static_cast<double>(c) / total;
            acc += p * p;
        }
        return 1.0 - acc;
    }

    int majority(const std::vector<int>& counts) const {
        return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    }

    struct Best {
        int feature = -1;
        double threshold = 0.0;
        double impurity = 0.0;  // n_left * gini_left + n_right * gini_right
    };

    void try_feature(int f, std::vector<int>& rows, Best& best) {
        std::sort(rows.begin(), rows.end(), [&](int a, int b) { return x(a, f) < x(b, f); });
        const int n = static_cast<int>(rows.size());
        std::vector<int> left(static_cast<std::size_t>(n_classes), 0), right(static_cast<std::size_t>(n_classes), 0);
        for (int r : rows) ++right[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])];
        for (int i = 0; i + 1 < n; ++i) {
            const int cls = y[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])];
            ++left[static_cast<std::size_t>(cls)];
            --right[static_cast<std::size_t>(cls)];
            const double a = x(rows[static_cast<std::size_t>(i)], f);
            const double b = x(rows[static_cast<std::size_t>(i) + 1], f);
            if (!(a < b)) continue;
            const int nl = i + 1, nr = n - nl;
            if (nl < params.min_leaf || nr < params.min_leaf) continue;
            const double imp = nl * gini(left, nl) + nr * gini(right, nr);
            if (best.feature < 0 || imp < best.impurity - 1e-12) {
                best.feature = f;
                best.threshold = 0.5 * (a + b);
                if (!(best.threshold >= a && best.threshold < b)) best.threshold = a;
                best.impurity = imp;
            }
        }
    }

    int grow(std::vector<int> rows, int depth) {
        std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
        for (int r : rows) ++counts[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])];
        const int n = static_cast<int>(rows.size());
        const double parent = n * gini(counts, n);

        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(Node{-1, 0.0, -1, -1, majority(counts)});

        const bool depth_capped = params.max_depth && depth >= *params.max_depth;
        if (parent <= 1e-12 || depth_capped || n < 2 * params.min_leaf) return id;

        // Random feature order; the first mtry are the candidates, the rest are
        // consulted only when every candidate is constant on this node.
        std::vector<int> order(static_cast<std::size_t>(x.cols()));
        std::iota(order.begin(), order.end(), 0);
        Best best;
        for (int k = 0; k < static_cast<int>(order.size()); ++k) {
            const auto j = k + static_cast<int>(uniform_index(rng, order.size() - static_cast<std::size_t>(k)));
            std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(j)]);
            if (k >= mtry && best.feature >= 0) break;
            try_feature(order[static_cast<std::size_t>(k)], rows, best);
        }
        if (best.feature < 0 || parent - best.impurity <= 1e-12) return id;

        importance[static_cast<std::size_t>(best.feature)] += parent - best.impurity;
        std::vector<int> lrows, rrows;
        for (int r : rows) (x(r, best.feature) <= best.threshold ? lrows : rrows).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        const int l = grow(std::move(lrows), depth + 1);
        const int r = grow(std::move(rrows), depth + 1);
        Node& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return id;
    }
};

}  // namespace

Forest train_forest(const Eigen::MatrixXd& x, std::span<const std::string> labels, const ForestParams& p) {
    if (static_cast<Eigen::Index>(labels.size()) != x.rows())
        throw DimensionError("label count does not match row count");
    if (x.rows() == 0 || x.cols() == 0) throw InsufficientDataError("empty training matrix");
    if (!x.allFinite()) throw NumericalError("non-finite value in training matrix");
    p.validate(static_cast<int>(x.cols()));

    Forest forest;
    forest.n_features = static_cast<int>(x.cols());
    forest.classes.assign(labels.begin(), labels.end());
    std::sort(forest.classes.begin(), forest.classes.end());
    forest.classes.erase(std::unique(forest.classes.begin(), forest.classes.end()), forest.classes.end());
    if (forest.classes.size() < 2)
        throw DegenerateLabelsError("training labels contain a single class");

    std::vector<int> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        y[i] = static_cast<int>(std::lower_bound(forest.classes.begin(), forest.classes.end(), labels[i]) -
                                forest.classes.begin());

    const int n = static_cast<int>(x.rows());
    const int mtry = p.mtry(forest.n_features);
    forest.trees.resize(static_cast<std::size_t>(p.n_trees));
    std::vector<std::vector<double>> tree_importance(static_cast<std::size_t>(p.n_trees));

    auto build = [&](int t) {
        TreeBuilder b{x, y, static_cast<int>(forest.classes.size()), p, mtry,
                      make_rng(p.seed, static_cast<std::uint64_t>(t)), {},
                      std::vector<double>(static_cast<std::size_t>(forest.n_features), 0.0)};
        std::vector<int> rows(static_cast<std::size_t>(n));
        for (auto& r : rows) r = static_cast<int>(uniform_index(b.rng, static_cast<std::uint64_t>(n)));
        b.grow(std::move(rows), 0);
        for (auto& v : b.importance) v /= n;
        forest.trees[static_cast<std::size_t>(t)] = std::move(b.tree);
        tree_importance[static_cast<std::size_t>(t)] = std::move(b.importance);
    };

    const int workers = std::min(p.threads, p.n_trees);
    if (workers <= 1) {
        for (int t = 0; t < p.n_trees; ++t) build(t);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (int t = w; t < p.n_trees; t += workers) build(t);
            });
        }
        for (auto& th : pool) th.join();
    }

    forest.importance.assign(static_cast<std::size_t>(forest.n_features), 0.0);
    for (const auto& ti : tree_importance)
        for (std::size_t f = 0; f < ti.size(); ++f) forest.importance[f] += ti[f] / p.n_trees;
    const double total = std::accumulate(forest.importance.begin(), forest.importance.end(), 0.0);
    if (total > 0.0)
        for (auto& v : forest.importance) v /= total;
    return forest;
}

}  // namespace morpho::classify
