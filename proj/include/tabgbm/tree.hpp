#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "tabgbm/matrix.hpp"

namespace tabgbm {

struct TreeParams {
    std::size_t max_depth = 6;
    std::size_t min_samples_leaf = 1;
};

/// Axis-aligned regression tree. Internal nodes route x[feature] <= threshold
/// to the left child; leaves carry the mean of their training targets, so the
/// leaves partition the input space into disjoint covering regions.
class RegressionTree {
public:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        double value = 0.0;  // leaf value
        int left = -1;
        int right = -1;
        bool is_leaf() const { return feature < 0; }
    };

    RegressionTree() = default;
    RegressionTree(std::vector<Node> nodes, std::size_t arity);

    double predict(std::span<const double> row) const;
    void predict_batch(MatrixView x, std::span<double> out) const;

    std::size_t leaf_count() const;
    std::size_t depth() const;
    std::size_t arity() const { return arity_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    /// Bitwise structural equality (same shape, same thresholds and values).
    bool operator==(const RegressionTree& other) const;

    /// {"j": feature, "t": threshold, "l": ..., "r": ...} / {"b": value}
    nlohmann::json to_json() const;
    static RegressionTree from_json(const nlohmann::json& j, std::size_t arity);

private:
    std::vector<Node> nodes_;  // root at index 0
    std::size_t arity_ = 0;
};

/// Greedy top-down least-squares fit. Split candidates are midpoints between
/// consecutive distinct sorted values; the best (feature, threshold) minimizes
/// the children's summed squared deviation from their means, ties broken by
/// lowest feature index then lowest threshold. Growth stops at max_depth, when
/// a child would fall under min_samples_leaf, or when no split has positive
/// gain.
RegressionTree fit_tree(MatrixView x, std::span<const double> targets, const TreeParams& params);

}  // namespace tabgbm
