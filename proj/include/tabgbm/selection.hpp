#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabgbm/data.hpp"
#include "tabgbm/gbm.hpp"

namespace tabgbm {

/// Hyperparameter grid; the Cartesian product of the four lists is the
/// candidate set, enumerated trees -> depth -> leaf -> rate.
struct Grid {
    std::vector<std::size_t> m_trees_values{300, 400, 450, 500};
    std::vector<std::size_t> max_depth_values{6, 7, 8};
    std::vector<std::size_t> min_samples_leaf_values{8, 10, 12};
    std::vector<double> learning_rate_values{0.01, 0.02, 0.03, 0.04};
    HuberConfig huber;
    double line_search_tol = 1e-8;

    std::vector<GbmParams> enumerate() const;

    nlohmann::json to_json() const;
    static Grid from_json(const nlohmann::json& j);
};

struct CandidateResult {
    GbmParams params;
    double train_r2 = 0.0;
    double val_r2 = 0.0;
    GbmModel model;

    nlohmann::json to_json() const;  // params and scores; the model is elided
};

/// One fitted model per grid point, sorted by training R^2 descending with
/// enumeration order breaking ties.
std::vector<CandidateResult> grid_search(const Dataset& train, const Dataset& validation,
                                         const Grid& grid, unsigned jobs = 1);

/// First candidate whose train-validation R^2 gap is under the overfit
/// threshold; earlier (higher-training-R^2) candidates are skipped as overfit.
const CandidateResult& select_best(const std::vector<CandidateResult>& candidates,
                                   double gap = 0.1);

struct CvReport {
    std::vector<double> per_fold_train_r2;
    std::vector<double> per_fold_val_r2;
    double mean_val_r2 = 0.0;
    double std_val_r2 = 0.0;

    nlohmann::json to_json() const;
};

/// k-fold cross validation of one hyperparameter combination.
CvReport cross_validate(const Dataset& data, const GbmParams& params, std::size_t k,
                        std::uint64_t seed, unsigned jobs = 1);

/// Accept iff the training R^2 is within `gap` of the mean CV score.
bool confirm_selection(const CvReport& report, double train_r2, double gap = 0.1);

struct RfeOptions {
    double stop_threshold = 0.01;
    std::uint64_t seed = 0;
    double f_train = 0.6;
    double f_val = 0.2;
    double f_test = 0.2;
    /// Reuse the initial split's row indices every iteration (default), or
    /// draw a fresh split per iteration.
    bool resplit_each_iteration = false;
    /// After the first full grid search, keep only the winning grid point.
    bool fast = false;
    std::size_t cv_folds = 10;
    double gap = 0.1;
    std::size_t shapley_instances = 64;
    std::size_t shapley_background = 64;
    std::size_t shapley_permutations = 24;
    unsigned jobs = 1;
};

struct RfeIteration {
    std::vector<std::string> active_features;
    GbmParams params;
    double cv_score = 0.0;
    std::vector<double> importance;  // mean-abs Shapley, aligned with active_features
    std::string removed;             // empty on the terminal iteration
};

struct RfeTrace {
    std::vector<RfeIteration> iterations;
    std::vector<std::string> final_features;
    std::string stop_reason;  // "score_drop", "single_feature", or "no_gated_model"

    nlohmann::json to_json() const;
};

/// Recursive feature elimination: per iteration, select a model on the active
/// features via grid search + overfit gate, score it with k-fold CV on the
/// merged train+validation rows, rank features by mean-abs Shapley
/// importance, and drop the weakest. Stops when the CV score falls by more
/// than stop_threshold (reverting to the previous feature set), when the
/// shrunken set no longer yields any gated model (same reversion), or when
/// one feature remains.
RfeTrace rfe(const Dataset& data, const Grid& grid, const RfeOptions& options);

}  // namespace tabgbm
