#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabgbm/data.hpp"
#include "tabgbm/matrix.hpp"
#include "tabgbm/tree.hpp"

namespace tabgbm {

/// How the Huber transition point is chosen: a fixed delta, or the
/// alpha-quantile of the current absolute residuals re-resolved every
/// boosting iteration.
struct HuberConfig {
    enum class Mode { fixed, quantile };
    Mode mode = Mode::quantile;
    double delta = 1.0;  // fixed mode
    double alpha = 0.9;  // quantile mode

    static HuberConfig fixed(double delta);
    static HuberConfig quantile(double alpha);

    nlohmann::json to_json() const;
    static HuberConfig from_json(const nlohmann::json& j);
};

struct GbmParams {
    std::size_t m_trees = 300;
    std::size_t max_depth = 6;
    std::size_t min_samples_leaf = 10;
    double learning_rate = 0.05;
    HuberConfig huber;
    double line_search_tol = 1e-8;

    void validate() const;
    nlohmann::json to_json() const;
    static GbmParams from_json(const nlohmann::json& j);
};

struct GbmStage {
    RegressionTree tree;
    double rho = 0.0;  // scalar line-search step for this stage
};

/// Fitted additive model: prediction = f0 + sum_m learning_rate * rho_m * tree_m(x).
struct GbmModel {
    double f0 = 0.0;
    std::vector<GbmStage> stages;
    double learning_rate = 1.0;
    std::uint64_t schema_fingerprint = 0;
    std::size_t n_features = 0;

    double predict_row(std::span<const double> row) const;
    std::vector<double> predict(MatrixView x) const;
    /// Checks the dataset's schema fingerprint before predicting.
    std::vector<double> predict(const Dataset& data) const;

    nlohmann::json to_json() const;
    static GbmModel from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static GbmModel load(const std::string& path);
};

/// Quadratic within delta of the target, linear with slope delta beyond.
double huber_loss(double y, double f, double delta);

/// Residual clipped to [-delta, delta].
double huber_neg_gradient(double y, double f, double delta);

/// Fixed mode passes its delta through; quantile mode takes the nearest-rank
/// alpha-quantile of |residuals|, floored at 1e-12.
double resolve_delta(std::span<const double> residuals, const HuberConfig& huber);

/// Constant minimizing total Huber loss: bracketed search on [min y, max y],
/// bisecting on the subgradient sign until the bracket width drops below tol.
double init_f0(std::span<const double> y, const HuberConfig& huber, double tol = 1e-8);

/// argmin over rho of sum_i huber(y_i, f_prev_i + rho * h_i); expanding
/// bracket around 0, then subgradient bisection. 0 when the direction is
/// identically zero.
double line_search_rho(std::span<const double> y, std::span<const double> f_prev,
                       std::span<const double> h_vals, double delta, double tol);

/// The boosting loop: initialize with init_f0, then per stage resolve delta,
/// fit a tree to the clipped negative gradients, line-search the scalar step,
/// and apply it shrunken by the learning rate.
GbmModel fit(const Dataset& train, const GbmParams& params);

}  // namespace tabgbm
