#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tabgbm/cli_config.hpp"
#include "tabgbm/data.hpp"
#include "tabgbm/errors.hpp"
#include "tabgbm/explain.hpp"
#include "tabgbm/gbm.hpp"
#include "tabgbm/metrics.hpp"
#include "tabgbm/numio.hpp"
#include "tabgbm/selection.hpp"
#include "tabgbm/svg.hpp"

namespace {

using namespace tabgbm;

// Outputs land under their final name only when complete: write to a
// sibling temp file, then rename.
void write_file_atomic(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    std::filesystem::path tmp(target);
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw ParseError("cannot open output file: " + tmp.string());
        out << content;
        if (!out.flush()) throw ParseError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

void write_json_atomic(const std::string& path, const nlohmann::json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return j;
}

struct Args {
    std::string data, schema, model, out;
    std::string splits, grid_file, gen, svg, json_out, schema_out, feature;
    std::vector<double> fractions;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    std::size_t n = 0, k = 0, ale_k = 0, permutations = 0, background_size = 0, max_rows = 0;
    std::size_t trees = 0, depth = 0, leaf = 0;
    double lr = 0, gap = 0, threshold = 0, noise = -1;
    std::string huber_mode, shapley_mode;
    double huber_delta = 0, huber_alpha = 0;
    bool resplit = false, fast = false;
};

GbmParams params_from_args(const Args& a) {
    GbmParams p;
    p.m_trees = a.trees;
    p.max_depth = a.depth;
    p.min_samples_leaf = a.leaf;
    p.learning_rate = a.lr;
    p.huber = a.huber_mode == "fixed" ? HuberConfig::fixed(a.huber_delta)
                                      : HuberConfig::quantile(a.huber_alpha);
    return p;
}

Dataset load_dataset(const Args& a) { return load_csv(a.data, Schema::load(a.schema)); }

int cmd_synth(const Args& a, bool seed_given) {
    SynthConfig cfg = SynthConfig::load(a.gen);
    if (a.n > 0) cfg.n = a.n;
    if (seed_given) cfg.seed = a.seed;
    if (a.noise >= 0) cfg.noise_sd = a.noise;
    const Dataset data = synth(cfg);
    std::ostringstream csv;
    write_csv(csv, data);
    write_file_atomic(a.out, csv.str());
    if (!a.schema_out.empty()) write_json_atomic(a.schema_out, cfg.schema.to_json());
    return 0;
}

int cmd_split(const Args& a) {
    const Dataset data = load_dataset(a);
    const SplitIndices s = split(data, a.fractions[0], a.fractions[1], a.fractions[2], a.seed);
    write_json_atomic(a.out, s.to_json());
    return 0;
}

int cmd_train(const Args& a) {
    Dataset data = load_dataset(a);
    if (!a.splits.empty()) {
        const SplitIndices s = SplitIndices::from_json(load_json(a.splits));
        data = data.select_rows(s.train);
    }
    const GbmModel model = fit(data, params_from_args(a));
    write_json_atomic(a.out, model.to_json());
    return 0;
}

int cmd_grid(const Args& a, const RunConfig& cfg) {
    const Dataset data = load_dataset(a);
    const SplitIndices s = SplitIndices::from_json(load_json(a.splits));
    const Grid grid = a.grid_file.empty() ? cfg.grid : Grid::from_json(load_json(a.grid_file));

    const auto candidates =
        grid_search(data.select_rows(s.train), data.select_rows(s.validation), grid, a.jobs);
    const CandidateResult& best = select_best(candidates, a.gap);

    nlohmann::json report_candidates = nlohmann::json::array();
    for (const auto& c : candidates) report_candidates.push_back(c.to_json());
    write_json_atomic(a.out, nlohmann::json{{"gap", a.gap},
                                            {"candidates", std::move(report_candidates)},
                                            {"selected", best.to_json()}});
    if (!a.model.empty()) write_json_atomic(a.model, best.model.to_json());
    return 0;
}

int cmd_cv(const Args& a) {
    const Dataset data = load_dataset(a);
    const CvReport report = cross_validate(data, params_from_args(a), a.k, a.seed, a.jobs);
    write_json_atomic(a.out, report.to_json());
    return 0;
}

int cmd_rfe(const Args& a, const RunConfig& cfg) {
    const Dataset data = load_dataset(a);
    const Grid grid = a.grid_file.empty() ? cfg.grid : Grid::from_json(load_json(a.grid_file));
    RfeOptions opt;
    opt.stop_threshold = a.threshold;
    opt.seed = a.seed;
    opt.f_train = a.fractions[0];
    opt.f_val = a.fractions[1];
    opt.f_test = a.fractions[2];
    opt.resplit_each_iteration = a.resplit;
    opt.fast = a.fast;
    opt.cv_folds = a.k;
    opt.gap = a.gap;
    opt.shapley_permutations = a.permutations;
    opt.shapley_background = a.background_size;
    opt.jobs = a.jobs;
    const RfeTrace trace = rfe(data, grid, opt);
    write_json_atomic(a.out, trace.to_json());
    return 0;
}

int cmd_predict(const Args& a) {
    const GbmModel model = GbmModel::load(a.model);
    const Dataset data = load_dataset(a);
    const auto preds = model.predict(data);
    std::ostringstream csv;
    csv << "prediction\n";
    for (double p : preds) csv << format_double(p) << '\n';
    write_file_atomic(a.out, csv.str());
    return 0;
}

int cmd_eval(const Args& a) {
    const GbmModel model = GbmModel::load(a.model);
    const Dataset data = load_dataset(a);
    const auto preds = model.predict(data);
    write_json_atomic(a.out, nlohmann::json{{"n", data.n()},
                                            {"r2", r_squared(data.y, preds)},
                                            {"rmse", rmse(data.y, preds)}});
    return 0;
}

int cmd_shap(const Args& a, const RunConfig& cfg) {
    const GbmModel model = GbmModel::load(a.model);
    Dataset data = load_dataset(a);

    ShapleyConfig shap;
    shap.mode = a.shapley_mode == "permutation" ? ShapleyConfig::Mode::permutation
                                                : ShapleyConfig::Mode::exact;
    shap.n_permutations = a.permutations;
    shap.seed = a.seed;
    shap.exact_dim_limit = cfg.exact_dim_limit;
    shap.jobs = a.jobs;
    shap.background = subsample_background(data, a.background_size, a.seed);
    if (a.max_rows > 0 && a.max_rows < data.n())
        data = subsample_background(data, a.max_rows, a.seed + 1);

    const auto predict_fn = make_predictor(model);
    const auto attr =
        shapley_attributions(predict_fn, make_view(data.x, data.n(), data.d()), shap);
    std::vector<std::string> names;
    for (const auto& f : data.schema.features) names.push_back(f.name);
    const auto report = importance(attr, names);

    write_json_atomic(a.out, nlohmann::json{{"attributions", attr.to_json()},
                                            {"importance", report.to_json()}});
    if (!a.svg.empty()) write_file_atomic(a.svg, render_importance_svg(report));
    return 0;
}

int cmd_ale(const Args& a) {
    const GbmModel model = GbmModel::load(a.model);
    const Dataset data = load_dataset(a);
    const int feature = data.schema.index_of(a.feature);
    if (feature < 0) throw Error("unknown feature \"" + a.feature + "\"");
    const auto j = static_cast<std::size_t>(feature);
    const auto predict_fn = make_predictor(model);
    const std::string& response = data.schema.response_name;

    if (data.schema.features[j].kind == FeatureKind::binary) {
        const BinaryAleEffect effect = ale_binary(predict_fn, data, j);
        std::ostringstream csv;
        csv << "level,value\n0," << format_double(effect.value_at_0) << "\n1,"
            << format_double(effect.value_at_1) << '\n';
        write_file_atomic(a.out, csv.str());
        if (!a.json_out.empty()) write_json_atomic(a.json_out, effect.to_json());
        if (!a.svg.empty()) write_file_atomic(a.svg, render_ale_svg(effect, response));
    } else {
        const AleCurve curve = ale_curve(predict_fn, data, j, a.ale_k);
        std::ostringstream csv;
        curve.write_csv(csv);
        write_file_atomic(a.out, csv.str());
        if (!a.json_out.empty()) write_json_atomic(a.json_out, curve.to_json());
        if (!a.svg.empty()) write_file_atomic(a.svg, render_ale_svg(curve, response));
    }
    return 0;
}

// --config beats the TABGBM_CONFIG environment variable; both are optional.
std::optional<std::string> find_config_path(int argc, char** argv) {
    for (int i = 1; i < argc - 1; ++i)
        if (std::string(argv[i]) == "--config") return std::string(argv[i + 1]);
    if (const char* env = std::getenv("TABGBM_CONFIG"); env && *env) return std::string(env);
    return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    try {
        if (const auto path = find_config_path(argc, argv)) cfg = RunConfig::load(*path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    CLI::App app{"Gradient-boosted regression and explanation toolkit for tabular demand data"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file with defaults for all flags");

    Args a;
    a.seed = cfg.seed;
    a.jobs = cfg.jobs;
    a.fractions = cfg.fractions;
    a.k = cfg.cv_k;
    a.gap = cfg.gap;
    a.threshold = cfg.threshold;
    a.trees = cfg.trees;
    a.depth = cfg.depth;
    a.leaf = cfg.leaf;
    a.lr = cfg.lr;
    a.huber_mode = cfg.huber_mode;
    a.huber_delta = cfg.huber_delta;
    a.huber_alpha = cfg.huber_alpha;
    a.shapley_mode = cfg.shapley_mode;
    a.permutations = cfg.permutations;
    a.background_size = cfg.background_size;
    a.ale_k = cfg.ale_k;

    auto add_data_schema = [&](CLI::App* cmd) {
        cmd->add_option("--data", a.data, "input CSV file")->required();
        cmd->add_option("--schema", a.schema, "schema JSON file")->required();
    };
    auto add_seed_jobs = [&](CLI::App* cmd) {
        cmd->add_option("--seed", a.seed, "random seed")->capture_default_str();
        cmd->add_option("--jobs", a.jobs, "worker thread cap")->capture_default_str();
    };
    auto add_gbm_params = [&](CLI::App* cmd) {
        cmd->add_option("--trees", a.trees, "number of boosting stages")->capture_default_str();
        cmd->add_option("--depth", a.depth, "maximum tree depth")->capture_default_str();
        cmd->add_option("--leaf", a.leaf, "minimum samples per leaf")->capture_default_str();
        cmd->add_option("--lr", a.lr, "learning rate in (0,1]")->capture_default_str();
        cmd->add_option("--huber-mode", a.huber_mode, "huber delta mode: fixed or quantile")
            ->capture_default_str();
        cmd->add_option("--huber-delta", a.huber_delta, "delta for fixed mode")
            ->capture_default_str();
        cmd->add_option("--huber-alpha", a.huber_alpha, "residual quantile for quantile mode")
            ->capture_default_str();
    };

    CLI::App* c_synth = app.add_subcommand("synth", "generate a seeded synthetic dataset");
    c_synth->add_option("--gen", a.gen, "generator config JSON")->required();
    c_synth->add_option("--n", a.n, "row count override");
    c_synth->add_option("--noise", a.noise, "noise standard deviation override");
    c_synth->add_option("--out", a.out, "output CSV path")->required();
    c_synth->add_option("--schema-out", a.schema_out, "also write the schema JSON here");
    add_seed_jobs(c_synth);

    CLI::App* c_split = app.add_subcommand("split", "deterministic train/validation/test split");
    add_data_schema(c_split);
    c_split->add_option("--fractions", a.fractions, "train, validation, test fractions")
        ->expected(3)
        ->capture_default_str();
    c_split->add_option("--out", a.out, "output split JSON")->required();
    add_seed_jobs(c_split);

    CLI::App* c_train = app.add_subcommand("train", "fit a boosted model");
    add_data_schema(c_train);
    c_train->add_option("--splits", a.splits, "split JSON; trains on its train rows only");
    add_gbm_params(c_train);
    c_train->add_option("--out", a.out, "output model JSON")->required();
    add_seed_jobs(c_train);

    CLI::App* c_grid = app.add_subcommand("grid", "grid search with the overfit gate");
    add_data_schema(c_grid);
    c_grid->add_option("--splits", a.splits, "split JSON")->required();
    c_grid->add_option("--grid", a.grid_file, "grid JSON file (defaults from config)");
    c_grid->add_option("--gap", a.gap, "overfit gate threshold")->capture_default_str();
    c_grid->add_option("--out", a.out, "output report JSON")->required();
    c_grid->add_option("--model-out", a.model, "also write the selected model here");
    add_seed_jobs(c_grid);

    CLI::App* c_cv = app.add_subcommand("cv", "k-fold cross validation of one combination");
    add_data_schema(c_cv);
    add_gbm_params(c_cv);
    c_cv->add_option("--k", a.k, "fold count")->capture_default_str();
    c_cv->add_option("--out", a.out, "output report JSON")->required();
    add_seed_jobs(c_cv);

    CLI::App* c_rfe = app.add_subcommand("rfe", "recursive feature elimination");
    add_data_schema(c_rfe);
    c_rfe->add_option("--grid", a.grid_file, "grid JSON file (defaults from config)");
    c_rfe->add_option("--threshold", a.threshold, "cv score drop that stops elimination")
        ->capture_default_str();
    c_rfe->add_option("--fractions", a.fractions, "train, validation, test fractions")
        ->expected(3)
        ->capture_default_str();
    c_rfe->add_option("--k", a.k, "cv fold count")->capture_default_str();
    c_rfe->add_option("--gap", a.gap, "overfit gate threshold")->capture_default_str();
    c_rfe->add_flag("--resplit", a.resplit, "draw a fresh split every iteration");
    c_rfe->add_flag("--fast", a.fast, "reduce the grid to the first winner after iteration 1");
    c_rfe->add_option("--permutations", a.permutations, "shapley permutations per instance")
        ->capture_default_str();
    c_rfe->add_option("--background-size", a.background_size, "shapley background rows")
        ->capture_default_str();
    c_rfe->add_option("--out", a.out, "output trace JSON")->required();
    add_seed_jobs(c_rfe);

    CLI::App* c_predict = app.add_subcommand("predict", "predict with a saved model");
    c_predict->add_option("--model", a.model, "model JSON")->required();
    add_data_schema(c_predict);
    c_predict->add_option("--out", a.out, "output prediction CSV")->required();

    CLI::App* c_eval = app.add_subcommand("eval", "R^2 and RMSE of a saved model on a dataset");
    c_eval->add_option("--model", a.model, "model JSON")->required();
    add_data_schema(c_eval);
    c_eval->add_option("--out", a.out, "output metrics JSON")->required();

    CLI::App* c_shap = app.add_subcommand("shap", "Shapley attributions and importance");
    c_shap->add_option("--model", a.model, "model JSON")->required();
    add_data_schema(c_shap);
    c_shap->add_option("--mode", a.shapley_mode, "exact or permutation")->capture_default_str();
    c_shap->add_option("--permutations", a.permutations, "permutations per instance")
        ->capture_default_str();
    c_shap->add_option("--background-size", a.background_size, "background sample cap")
        ->capture_default_str();
    c_shap->add_option("--max-rows", a.max_rows, "explain at most this many rows (0 = all)");
    c_shap->add_option("--out", a.out, "output report JSON")->required();
    c_shap->add_option("--svg", a.svg, "also render the importance bar chart here");
    add_seed_jobs(c_shap);

    CLI::App* c_ale = app.add_subcommand("ale", "accumulated local effects of one feature");
    c_ale->add_option("--model", a.model, "model JSON")->required();
    add_data_schema(c_ale);
    c_ale->add_option("--feature", a.feature, "feature name")->required();
    c_ale->add_option("--k", a.ale_k, "interval count for the quantile grid")
        ->capture_default_str();
    c_ale->add_option("--out", a.out, "output CSV path")->required();
    c_ale->add_option("--json", a.json_out, "also write the curve as JSON here");
    c_ale->add_option("--svg", a.svg, "also render the curve here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(c_synth))
            return cmd_synth(a, c_synth->count("--seed") > 0);
        if (app.got_subcommand(c_split)) return cmd_split(a);
        if (app.got_subcommand(c_train)) return cmd_train(a);
        if (app.got_subcommand(c_grid)) return cmd_grid(a, cfg);
        if (app.got_subcommand(c_cv)) return cmd_cv(a);
        if (app.got_subcommand(c_rfe)) return cmd_rfe(a, cfg);
        if (app.got_subcommand(c_predict)) return cmd_predict(a);
        if (app.got_subcommand(c_eval)) return cmd_eval(a);
        if (app.got_subcommand(c_shap)) return cmd_shap(a, cfg);
        if (app.got_subcommand(c_ale)) return cmd_ale(a);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
