#include "tabgbm/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tabgbm/errors.hpp"

namespace tabgbm {

RegressionTree::RegressionTree(std::vector<Node> nodes, std::size_t arity)
    : nodes_(std::move(nodes)), arity_(arity) {}

double RegressionTree::predict(std::span<const double> row) const {
    if (row.size() != arity_) throw ArityMismatch(arity_, row.size());
    int idx = 0;
    while (!nodes_[idx].is_leaf()) {
        const Node& n = nodes_[idx];
        idx = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[idx].value;
}

void RegressionTree::predict_batch(MatrixView x, std::span<double> out) const {
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict(x.row(i));
}

std::size_t RegressionTree::leaf_count() const {
    std::size_t c = 0;
    for (const auto& n : nodes_)
        if (n.is_leaf()) ++c;
    return c;
}

std::size_t RegressionTree::depth() const {
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    std::size_t max_depth = 0;
    while (!stack.empty()) {
        auto [idx, d] = stack.back();
        stack.pop_back();
        max_depth = std::max(max_depth, d);
        const Node& n = nodes_[static_cast<std::size_t>(idx)];
        if (!n.is_leaf()) {
            stack.push_back({n.left, d + 1});
            stack.push_back({n.right, d + 1});
        }
    }
    return max_depth;
}

bool RegressionTree::operator==(const RegressionTree& other) const {
    if (nodes_.size() != other.nodes_.size() || arity_ != other.arity_) return false;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& a = nodes_[i];
        const Node& b = other.nodes_[i];
        if (a.feature != b.feature || a.left != b.left || a.right != b.right) return false;
        if (a.is_leaf() ? (a.value != b.value) : (a.threshold != b.threshold)) return false;
    }
    return true;
}

namespace {

nlohmann::json node_to_json(const std::vector<RegressionTree::Node>& nodes, int idx) {
    const auto& n = nodes[static_cast<std::size_t>(idx)];
    if (n.is_leaf()) return nlohmann::json{{"b", n.value}};
    return nlohmann::json{{"j", n.feature},
                          {"t", n.threshold},
                          {"l", node_to_json(nodes, n.left)},
                          {"r", node_to_json(nodes, n.right)}};
}

int node_from_json(const nlohmann::json& j, std::vector<RegressionTree::Node>& nodes,
                   std::size_t arity) {
    const int idx = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (j.contains("b")) {
        nodes[static_cast<std::size_t>(idx)].value = j.at("b").get<double>();
        return idx;
    }
    const int feature = j.at("j").get<int>();
    if (feature < 0 || static_cast<std::size_t>(feature) >= arity)
        throw ParseError("tree node references feature " + std::to_string(feature) +
                         " outside arity " + std::to_string(arity));
    const double threshold = j.at("t").get<double>();
    const int left = node_from_json(j.at("l"), nodes, arity);
    const int right = node_from_json(j.at("r"), nodes, arity);
    auto& n = nodes[static_cast<std::size_t>(idx)];
    n.feature = feature;
    n.threshold = threshold;
    n.left = left;
    n.right = right;
    return idx;
}

}  // namespace

nlohmann::json RegressionTree::to_json() const { return node_to_json(nodes_, 0); }

RegressionTree RegressionTree::from_json(const nlohmann::json& j, std::size_t arity) {
    std::vector<Node> nodes;
    try {
        node_from_json(j, nodes, arity);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("tree document: ") + e.what());
    }
    return RegressionTree(std::move(nodes), arity);
}

namespace {

struct Builder {
    MatrixView x;
    std::span<const double> targets;
    TreeParams params;
    std::vector<RegressionTree::Node> nodes;

    // Mean accumulated over ascending-sorted targets so the result is
    // invariant to row permutation.
    double leaf_value(const std::vector<std::size_t>& idx) const {
        std::vector<double> vals;
        vals.reserve(idx.size());
        for (std::size_t i : idx) vals.push_back(targets[i]);
        std::sort(vals.begin(), vals.end());
        double sum = 0;
        for (double v : vals) sum += v;
        return sum / static_cast<double>(vals.size());
    }

    struct Split {
        bool found = false;
        std::size_t feature = 0;
        double threshold = 0;
        double gain = 0;
    };

    // Best split over all features. Candidate evaluation sorts rows by
    // (feature value, target) so sums do not depend on row order; scanning
    // features ascending and thresholds ascending with a strict improvement
    // test yields the lowest-feature, lowest-threshold winner among ties.
    Split best_split(const std::vector<std::size_t>& idx) const {
        const std::size_t n = idx.size();
        Split best;
        std::vector<std::pair<double, double>> pairs(n);
        std::vector<double> prefix(n + 1);
        for (std::size_t j = 0; j < x.cols; ++j) {
            for (std::size_t p = 0; p < n; ++p)
                pairs[p] = {x.at(idx[p], j), targets[idx[p]]};
            std::sort(pairs.begin(), pairs.end());
            if (pairs.front().first == pairs.back().first) continue;

            prefix[0] = 0;
            for (std::size_t p = 0; p < n; ++p) prefix[p + 1] = prefix[p] + pairs[p].second;
            const double total = prefix[n];
            const double parent_term = total * total / static_cast<double>(n);

            for (std::size_t p = 1; p < n; ++p) {
                if (pairs[p - 1].first == pairs[p].first) continue;
                if (p < params.min_samples_leaf || n - p < params.min_samples_leaf) continue;
                const double sum_l = prefix[p];
                const double sum_r = total - sum_l;
                const double gain = sum_l * sum_l / static_cast<double>(p) +
                                    sum_r * sum_r / static_cast<double>(n - p) - parent_term;
                if (!best.found || gain > best.gain) {
                    best.found = true;
                    best.feature = j;
                    best.threshold = (pairs[p - 1].first + pairs[p].first) / 2.0;
                    best.gain = gain;
                }
            }
        }
        if (best.found && !(best.gain > 0.0)) best.found = false;
        return best;
    }

    int build(const std::vector<std::size_t>& idx, std::size_t depth) {
        const int node_id = static_cast<int>(nodes.size());
        nodes.emplace_back();

        double lo = targets[idx[0]], hi = lo;
        for (std::size_t i : idx) {
            lo = std::min(lo, targets[i]);
            hi = std::max(hi, targets[i]);
        }
        const bool constant_targets = (lo == hi);

        Split split;
        if (!constant_targets && depth < params.max_depth &&
            idx.size() >= 2 * params.min_samples_leaf)
            split = best_split(idx);

        if (!split.found) {
            nodes[static_cast<std::size_t>(node_id)].value = leaf_value(idx);
            return node_id;
        }

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx)
            (x.at(i, split.feature) <= split.threshold ? left_idx : right_idx).push_back(i);

        const int left = build(left_idx, depth + 1);
        const int right = build(right_idx, depth + 1);
        auto& n = nodes[static_cast<std::size_t>(node_id)];
        n.feature = static_cast<int>(split.feature);
        n.threshold = split.threshold;
        n.left = left;
        n.right = right;
        return node_id;
    }
};

}  // namespace

RegressionTree fit_tree(MatrixView x, std::span<const double> targets, const TreeParams& params) {
    if (x.rows == 0 || targets.empty()) throw EmptyInput("tree fit requires at least one row");
    if (x.rows != targets.size()) throw LengthMismatch(x.rows, targets.size());
    if (params.max_depth < 1 || params.min_samples_leaf < 1)
        throw Error("tree params must be strictly positive");

    Builder b{x, targets, params, {}};
    std::vector<std::size_t> all(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) all[i] = i;
    b.build(all, 0);
    return RegressionTree(std::move(b.nodes), x.cols);
}

}  // namespace tabgbm
