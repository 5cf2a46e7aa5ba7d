#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabgbm/selection.hpp"

namespace tabgbm {

/// Defaults for every tunable the CLI exposes; values loaded from a config
/// file are overridden by command-line flags. Round-trips losslessly through
/// JSON.
struct RunConfig {
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    double gap = 0.1;            // overfit gate threshold
    double threshold = 0.01;     // rfe score-drop stop
    std::size_t cv_k = 10;
    std::size_t ale_k = 40;
    std::vector<double> fractions{0.6, 0.2, 0.2};
    std::size_t background_size = 100;
    std::string shapley_mode = "exact";
    std::size_t permutations = 200;
    std::size_t exact_dim_limit = 14;
    std::size_t trees = 400;
    std::size_t depth = 7;
    std::size_t leaf = 10;
    double lr = 0.01;
    std::string huber_mode = "quantile";
    double huber_delta = 1.0;
    double huber_alpha = 0.9;
    double line_search_tol = 1e-8;
    Grid grid;

    HuberConfig huber() const;
    GbmParams gbm_params() const;

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);
};

}  // namespace tabgbm
