#include "tabgbm/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabgbm/errors.hpp"
#include "tabgbm/explain.hpp"
#include "tabgbm/metrics.hpp"
#include "tabgbm/parallel.hpp"

namespace tabgbm {

std::vector<GbmParams> Grid::enumerate() const {
    if (m_trees_values.empty() || max_depth_values.empty() || min_samples_leaf_values.empty() ||
        learning_rate_values.empty())
        throw EmptyGrid();
    std::vector<GbmParams> out;
    out.reserve(m_trees_values.size() * max_depth_values.size() * min_samples_leaf_values.size() *
                learning_rate_values.size());
    for (std::size_t m : m_trees_values)
        for (std::size_t depth : max_depth_values)
            for (std::size_t leaf : min_samples_leaf_values)
                for (double rate : learning_rate_values) {
                    GbmParams p;
                    p.m_trees = m;
                    p.max_depth = depth;
                    p.min_samples_leaf = leaf;
                    p.learning_rate = rate;
                    p.huber = huber;
                    p.line_search_tol = line_search_tol;
                    p.validate();
                    out.push_back(p);
                }
    return out;
}

nlohmann::json Grid::to_json() const {
    return nlohmann::json{{"m_trees", m_trees_values},
                          {"max_depth", max_depth_values},
                          {"min_samples_leaf", min_samples_leaf_values},
                          {"learning_rate", learning_rate_values},
                          {"huber", huber.to_json()},
                          {"line_search_tol", line_search_tol}};
}

Grid Grid::from_json(const nlohmann::json& j) {
    Grid g;
    try {
        g.m_trees_values = j.at("m_trees").get<std::vector<std::size_t>>();
        g.max_depth_values = j.at("max_depth").get<std::vector<std::size_t>>();
        g.min_samples_leaf_values = j.at("min_samples_leaf").get<std::vector<std::size_t>>();
        g.learning_rate_values = j.at("learning_rate").get<std::vector<double>>();
        g.huber = HuberConfig::from_json(j.at("huber"));
        if (j.contains("line_search_tol")) g.line_search_tol = j.at("line_search_tol").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("grid document: ") + e.what());
    }
    return g;
}

nlohmann::json CandidateResult::to_json() const {
    return nlohmann::json{
        {"params", params.to_json()}, {"train_r2", train_r2}, {"val_r2", val_r2}};
}

std::vector<CandidateResult> grid_search(const Dataset& train, const Dataset& validation,
                                         const Grid& grid, unsigned jobs) {
    if (train.n() == 0 || validation.n() == 0) throw EmptyInput("grid search datasets");
    if (train.schema.fingerprint() != validation.schema.fingerprint())
        throw SchemaMismatch("train and validation schemas differ");

    const auto candidates = grid.enumerate();
    std::vector<CandidateResult> results(candidates.size());
    parallel_for(candidates.size(), jobs, [&](std::size_t c) {
        CandidateResult r;
        r.params = candidates[c];
        r.model = fit(train, r.params);
        r.train_r2 = r_squared(train.y, r.model.predict(train));
        r.val_r2 = r_squared(validation.y, r.model.predict(validation));
        results[c] = std::move(r);
    });
    std::stable_sort(results.begin(), results.end(),
                     [](const CandidateResult& a, const CandidateResult& b) {
                         return a.train_r2 > b.train_r2;
                     });
    return results;
}

const CandidateResult& select_best(const std::vector<CandidateResult>& candidates, double gap) {
    for (const auto& c : candidates)
        if (c.train_r2 - c.val_r2 < gap) return c;
    throw NoModelPassesGate(gap);
}

nlohmann::json CvReport::to_json() const {
    return nlohmann::json{{"per_fold_train_r2", per_fold_train_r2},
                          {"per_fold_val_r2", per_fold_val_r2},
                          {"mean_val_r2", mean_val_r2},
                          {"std_val_r2", std_val_r2}};
}

CvReport cross_validate(const Dataset& data, const GbmParams& params, std::size_t k,
                        std::uint64_t seed, unsigned jobs) {
    const auto folds = kfold(data.n(), k, seed);

    for (const auto& fold : folds) {
        double lo = data.y[fold.front()], hi = lo;
        for (std::size_t i : fold) {
            lo = std::min(lo, data.y[i]);
            hi = std::max(hi, data.y[i]);
        }
        if (lo == hi) throw DegenerateResponse();
    }

    CvReport report;
    report.per_fold_train_r2.assign(k, 0.0);
    report.per_fold_val_r2.assign(k, 0.0);
    parallel_for(k, jobs, [&](std::size_t f) {
        std::vector<bool> held(data.n(), false);
        for (std::size_t i : folds[f]) held[i] = true;
        std::vector<std::size_t> train_idx;
        train_idx.reserve(data.n() - folds[f].size());
        for (std::size_t i = 0; i < data.n(); ++i)
            if (!held[i]) train_idx.push_back(i);

        const Dataset train = data.select_rows(train_idx);
        const Dataset val = data.select_rows(folds[f]);
        const GbmModel model = fit(train, params);
        report.per_fold_train_r2[f] = r_squared(train.y, model.predict(train));
        report.per_fold_val_r2[f] = r_squared(val.y, model.predict(val));
    });

    double mean = 0;
    for (double v : report.per_fold_val_r2) mean += v;
    mean /= static_cast<double>(k);
    double ss = 0;
    for (double v : report.per_fold_val_r2) ss += (v - mean) * (v - mean);
    report.mean_val_r2 = mean;
    report.std_val_r2 = std::sqrt(ss / static_cast<double>(k));
    return report;
}

bool confirm_selection(const CvReport& report, double train_r2, double gap) {
    return train_r2 - report.mean_val_r2 < gap;
}

nlohmann::json RfeTrace::to_json() const {
    nlohmann::json iters = nlohmann::json::array();
    for (const auto& it : iterations) {
        nlohmann::json imp = nlohmann::json::object();
        for (std::size_t j = 0; j < it.active_features.size(); ++j)
            imp[it.active_features[j]] = it.importance[j];
        iters.push_back(nlohmann::json{{"features", it.active_features},
                                       {"params", it.params.to_json()},
                                       {"cv_score", it.cv_score},
                                       {"importance", std::move(imp)},
                                       {"removed", it.removed.empty()
                                                       ? nlohmann::json(nullptr)
                                                       : nlohmann::json(it.removed)}});
    }
    return nlohmann::json{{"iterations", std::move(iters)},
                          {"final_features", final_features},
                          {"stop_reason", stop_reason}};
}

RfeTrace rfe(const Dataset& data, const Grid& grid, const RfeOptions& options) {
    if (data.d() < 2) throw TooFewFeatures(data.d());
    if (data.n() == 0) throw EmptyInput("rfe dataset");

    std::vector<std::size_t> active(data.d());
    std::iota(active.begin(), active.end(), 0);

    const SplitIndices fixed_split =
        split(data, options.f_train, options.f_val, options.f_test, options.seed);

    RfeTrace trace;
    std::vector<std::string> prev_features;
    double prev_score = 0.0;
    bool have_prev = false;
    Grid iteration_grid = grid;

    for (std::size_t iter = 0;; ++iter) {
        const SplitIndices split_idx =
            options.resplit_each_iteration
                ? split(data, options.f_train, options.f_val, options.f_test,
                        options.seed + iter)
                : fixed_split;

        const Dataset sub = data.select_features(active);
        const Dataset train = sub.select_rows(split_idx.train);
        const Dataset validation = sub.select_rows(split_idx.validation);

        const auto candidates = grid_search(train, validation, iteration_grid, options.jobs);
        const CandidateResult* gated = nullptr;
        try {
            gated = &select_best(candidates, options.gap);
        } catch (const NoModelPassesGate&) {
            // The shrunken feature set cannot support a gated model anymore;
            // that is the same degradation the score-drop rule reverts on.
            if (!have_prev) throw;
            trace.final_features = prev_features;
            trace.stop_reason = "no_gated_model";
            break;
        }
        const CandidateResult& best = *gated;
        if (options.fast && iter == 0) {
            iteration_grid.m_trees_values = {best.params.m_trees};
            iteration_grid.max_depth_values = {best.params.max_depth};
            iteration_grid.min_samples_leaf_values = {best.params.min_samples_leaf};
            iteration_grid.learning_rate_values = {best.params.learning_rate};
        }

        std::vector<std::size_t> merged = split_idx.train;
        merged.insert(merged.end(), split_idx.validation.begin(), split_idx.validation.end());
        std::sort(merged.begin(), merged.end());
        const double score =
            cross_validate(sub.select_rows(merged), best.params, options.cv_folds,
                           options.seed, options.jobs)
                .mean_val_r2;

        ShapleyConfig shap;
        shap.mode = ShapleyConfig::Mode::permutation;
        shap.n_permutations = options.shapley_permutations;
        shap.seed = options.seed;
        shap.jobs = options.jobs;
        shap.background = subsample_background(train, options.shapley_background, options.seed);
        const Dataset instances =
            subsample_background(train, options.shapley_instances, options.seed + 1);
        const auto predict_fn = make_predictor(best.model);
        const auto attr = shapley_attributions(
            predict_fn, make_view(instances.x, instances.n(), instances.d()), shap);

        std::vector<std::string> names;
        for (const auto& f : sub.schema.features) names.push_back(f.name);
        const auto report = importance(attr, names);

        RfeIteration record;
        record.active_features = names;
        record.params = best.params;
        record.cv_score = score;
        record.importance = report.mean_abs;
        trace.iterations.push_back(std::move(record));

        if (have_prev && prev_score - score > options.stop_threshold) {
            trace.final_features = prev_features;
            trace.stop_reason = "score_drop";
            break;
        }
        if (active.size() == 1) {
            trace.final_features = names;
            trace.stop_reason = "single_feature";
            break;
        }

        // Weakest feature: minimum mean-abs importance, lowest index on ties.
        std::size_t weakest = 0;
        for (std::size_t j = 1; j < report.mean_abs.size(); ++j)
            if (report.mean_abs[j] < report.mean_abs[weakest]) weakest = j;
        trace.iterations.back().removed = names[weakest];

        prev_features = names;
        prev_score = score;
        have_prev = true;
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(weakest));
    }
    return trace;
}

}  // namespace tabgbm
