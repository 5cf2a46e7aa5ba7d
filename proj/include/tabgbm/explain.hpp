#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabgbm/data.hpp"
#include "tabgbm/gbm.hpp"
#include "tabgbm/matrix.hpp"

namespace tabgbm {

/// Any scalar prediction function over a feature row.
using PredictFn = std::function<double(std::span<const double>)>;

/// Adapter for a fitted model; the model must outlive the returned function.
PredictFn make_predictor(const GbmModel& model);

struct ShapleyConfig {
    enum class Mode { exact, permutation };
    Mode mode = Mode::exact;
    std::size_t n_permutations = 200;  // permutation mode
    std::uint64_t seed = 0;            // permutation mode
    Dataset background;                // reference sample for marginalization
    std::size_t exact_dim_limit = 14;
    unsigned jobs = 1;
};

/// Per-observation, per-feature attributions phi, plus the expected
/// prediction over the background (the additive baseline).
struct AttributionMatrix {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> phi;  // row-major n x d
    double baseline = 0.0;

    double at(std::size_t i, std::size_t j) const { return phi[i * d + j]; }

    nlohmann::json to_json() const;
};

struct ImportanceReport {
    std::vector<std::string> feature_names;
    std::vector<double> signed_sum;  // sum_i phi_ij
    std::vector<double> mean_abs;    // (1/N) sum_i |phi_ij|; the ranking key
    std::vector<std::size_t> ranking;  // feature indices, mean_abs descending

    nlohmann::json to_json() const;
};

/// Shapley attributions of predict_fn at each row of x. Coalition values are
/// realized by interventional marginalization: absent features are drawn from
/// the background sample, never by retraining. Exact mode enumerates every
/// coalition; permutation mode averages marginal contributions over seeded
/// random feature orderings.
AttributionMatrix shapley_attributions(const PredictFn& predict_fn, MatrixView x,
                                       const ShapleyConfig& config);

ImportanceReport importance(const AttributionMatrix& attributions,
                            std::vector<std::string> feature_names);

/// Seeded row subsample used as the default Shapley background.
Dataset subsample_background(const Dataset& data, std::size_t max_rows, std::uint64_t seed);

/// Accumulated local effects of one feature over a quantile grid: per-bin
/// averaged finite differences of predict_fn, accumulated across bins, then
/// centered by the count-weighted mean.
struct AleCurve {
    std::size_t feature = 0;
    std::string feature_name;
    std::vector<double> edges;        // z_0 .. z_K
    std::vector<std::size_t> counts;  // per interval, size K
    std::vector<double> uncentered;   // at each edge; uncentered[0] == 0
    std::vector<double> centered;

    std::size_t k() const { return counts.size(); }

    nlohmann::json to_json() const;
    void write_csv(std::ostream& out) const;
};

AleCurve ale_curve(const PredictFn& predict_fn, const Dataset& data, std::size_t feature,
                   std::size_t k_intervals);

/// Binary-feature effect: one interval [0, 1], no centering. value_at_1 is
/// the mean prediction difference from flipping the flag on.
struct BinaryAleEffect {
    std::size_t feature = 0;
    std::string feature_name;
    double value_at_0 = 0.0;
    double value_at_1 = 0.0;

    nlohmann::json to_json() const;
};

BinaryAleEffect ale_binary(const PredictFn& predict_fn, const Dataset& data, std::size_t feature);

}  // namespace tabgbm
