#include "tabgbm/cli_config.hpp"

#include <fstream>

#include "tabgbm/errors.hpp"

namespace tabgbm {

HuberConfig RunConfig::huber() const {
    if (huber_mode == "fixed") return HuberConfig::fixed(huber_delta);
    if (huber_mode == "quantile") return HuberConfig::quantile(huber_alpha);
    throw ParseError("unknown huber mode \"" + huber_mode + "\"");
}

GbmParams RunConfig::gbm_params() const {
    GbmParams p;
    p.m_trees = trees;
    p.max_depth = depth;
    p.min_samples_leaf = leaf;
    p.learning_rate = lr;
    p.huber = huber();
    p.line_search_tol = line_search_tol;
    p.validate();
    return p;
}

nlohmann::json RunConfig::to_json() const {
    return nlohmann::json{{"seed", seed},
                          {"jobs", jobs},
                          {"gap", gap},
                          {"threshold", threshold},
                          {"cv_k", cv_k},
                          {"ale_k", ale_k},
                          {"fractions", fractions},
                          {"background_size", background_size},
                          {"shapley_mode", shapley_mode},
                          {"permutations", permutations},
                          {"exact_dim_limit", exact_dim_limit},
                          {"trees", trees},
                          {"depth", depth},
                          {"leaf", leaf},
                          {"lr", lr},
                          {"huber_mode", huber_mode},
                          {"huber_delta", huber_delta},
                          {"huber_alpha", huber_alpha},
                          {"line_search_tol", line_search_tol},
                          {"grid", grid.to_json()}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        auto get = [&j](const char* key, auto& target) {
            if (j.contains(key)) target = j.at(key).get<std::decay_t<decltype(target)>>();
        };
        get("seed", c.seed);
        get("jobs", c.jobs);
        get("gap", c.gap);
        get("threshold", c.threshold);
        get("cv_k", c.cv_k);
        get("ale_k", c.ale_k);
        get("fractions", c.fractions);
        get("background_size", c.background_size);
        get("shapley_mode", c.shapley_mode);
        get("permutations", c.permutations);
        get("exact_dim_limit", c.exact_dim_limit);
        get("trees", c.trees);
        get("depth", c.depth);
        get("leaf", c.leaf);
        get("lr", c.lr);
        get("huber_mode", c.huber_mode);
        get("huber_delta", c.huber_delta);
        get("huber_alpha", c.huber_alpha);
        get("line_search_tol", c.line_search_tol);
        if (j.contains("grid")) c.grid = Grid::from_json(j.at("grid"));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("run config: ") + e.what());
    }
    if (c.fractions.size() != 3) throw ParseError("run config: fractions must have 3 entries");
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return from_json(j);
}

}  // namespace tabgbm
