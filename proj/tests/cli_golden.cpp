// Golden-file checks for the command-line tool.
//
// Usage: cli_golden <cli_binary> <golden_dir> <data_dir> <scratch_dir>
//
// Every command writes its outputs into the scratch directory; each output is
// compared byte-for-byte against the stored golden, and the core commands are
// additionally recomputed through the library to prove the CLI adds nothing
// beyond serialization. Error paths are checked for their documented exit
// codes. Set TABGBM_UPDATE_GOLDEN=1 to regenerate the goldens.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tabgbm/cli_config.hpp"
#include "tabgbm/data.hpp"
#include "tabgbm/explain.hpp"
#include "tabgbm/gbm.hpp"
#include "tabgbm/metrics.hpp"
#include "tabgbm/numio.hpp"
#include "tabgbm/selection.hpp"
#include "tabgbm/svg.hpp"

namespace fs = std::filesystem;
using namespace tabgbm;

namespace {

int g_failures = 0;

void report(bool ok, const std::string& what) {
    std::printf("%s  %s\n", ok ? "ok  " : "FAIL", what.c_str());
    if (!ok) ++g_failures;
}

int run_cmd(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    if (status < 0) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<unreadable: " + path.string() + ">";
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

bool update_mode() {
    const char* env = std::getenv("TABGBM_UPDATE_GOLDEN");
    return env && *env == '1';
}

fs::path g_golden;

void check_golden(const fs::path& produced, const std::string& name) {
    if (update_mode()) {
        fs::copy_file(produced, g_golden / name, fs::copy_options::overwrite_existing);
        std::printf("wrote golden %s\n", name.c_str());
        return;
    }
    report(slurp(produced) == slurp(g_golden / name), "golden " + name);
}

void check_bytes(const std::string& produced, const std::string& name,
                 const std::string& what) {
    if (update_mode()) return;
    report(produced == slurp(g_golden / name), what);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 5) {
        std::fprintf(stderr, "usage: cli_golden <cli> <golden_dir> <data_dir> <scratch_dir>\n");
        return 2;
    }
    const std::string cli = argv[1];
    g_golden = argv[2];
    const std::string data_dir = argv[3];
    const fs::path scratch = argv[4];
    fs::remove_all(scratch);
    fs::create_directories(scratch);
    fs::create_directories(g_golden);
    const std::string s = scratch.string();

    const std::string grid_doc = R"({
  "m_trees": [10, 25],
  "max_depth": [2],
  "min_samples_leaf": [5],
  "learning_rate": [0.2],
  "huber": {"mode": "quantile", "alpha": 0.9}
})";
    std::ofstream(scratch / "grid.json") << grid_doc;

    const std::string quiet = " >/dev/null 2>&1";
    const std::string common = " --data " + s + "/synth.csv --schema " + s + "/schema.json";
    struct Step {
        std::string cmd;
        std::vector<std::string> outputs;
    };
    const std::vector<Step> steps = {
        {cli + " synth --gen " + data_dir + "/synth_default.json --n 200 --seed 9 --out " + s +
             "/synth.csv --schema-out " + s + "/schema.json",
         {"synth.csv", "schema.json"}},
        {cli + " split" + common + " --fractions 0.6 0.2 0.2 --seed 9 --out " + s + "/split.json",
         {"split.json"}},
        {cli + " train" + common + " --splits " + s + "/split.json --trees 20 --depth 3 " +
             "--leaf 5 --lr 0.1 --out " + s + "/model.json",
         {"model.json"}},
        {cli + " predict --model " + s + "/model.json" + common + " --out " + s + "/pred.csv",
         {"pred.csv"}},
        {cli + " eval --model " + s + "/model.json" + common + " --out " + s + "/eval.json",
         {"eval.json"}},
        {cli + " cv" + common + " --trees 10 --depth 2 --leaf 5 --lr 0.2 --k 5 --seed 9 --out " +
             s + "/cv.json",
         {"cv.json"}},
        {cli + " grid" + common + " --splits " + s + "/split.json --grid " + s +
             "/grid.json --gap 0.5 --out " + s + "/grid_report.json --model-out " + s +
             "/best.json",
         {"grid_report.json", "best.json"}},
        {cli + " shap --model " + s + "/model.json" + common +
             " --mode permutation --permutations 20 --background-size 10 --max-rows 8 --seed 9" +
             " --out " + s + "/shap.json --svg " + s + "/importance.svg",
         {"shap.json", "importance.svg"}},
        {cli + " ale --model " + s + "/model.json" + common +
             " --feature \"Travel time per day\" --k 6 --out " + s + "/ale.csv --json " + s +
             "/ale.json --svg " + s + "/ale.svg",
         {"ale.csv", "ale.json", "ale.svg"}},
        {cli + " ale --model " + s + "/model.json" + common +
             " --feature \"Daily Internet use\" --out " + s + "/ale_flag.csv --json " + s +
             "/ale_flag.json --svg " + s + "/ale_flag.svg",
         {"ale_flag.csv", "ale_flag.json", "ale_flag.svg"}},
        {cli + " rfe" + common + " --grid " + s + "/grid.json --threshold 0.02 --k 4 --gap 1.0" +
             " --permutations 6 --background-size 8 --seed 9 --out " + s + "/rfe.json",
         {"rfe.json"}},
    };

    for (const auto& step : steps) {
        const int code = run_cmd(step.cmd + quiet);
        report(code == 0, "exit 0: " + step.cmd.substr(cli.size() + 1, 40));
        if (code != 0) continue;
        for (const auto& out : step.outputs) check_golden(scratch / out, out);
    }

    // The CLI must be a thin delegator: recompute every artifact through the
    // library and compare against the same stored goldens.
    if (!update_mode()) {
        SynthConfig synth_cfg = SynthConfig::load(data_dir + "/synth_default.json");
        synth_cfg.n = 200;
        synth_cfg.seed = 9;
        const Dataset generated = synth(synth_cfg);
        std::ostringstream synth_csv;
        write_csv(synth_csv, generated);
        check_bytes(synth_csv.str(), "synth.csv", "library match: synth");
        check_bytes(synth_cfg.schema.to_json().dump(2) + "\n", "schema.json",
                    "library match: synth schema");

        const Schema schema = Schema::load(s + "/schema.json");
        const Dataset data = load_csv(s + "/synth.csv", schema);

        const SplitIndices sp = split(data, 0.6, 0.2, 0.2, 9);
        check_bytes(sp.to_json().dump(2) + "\n", "split.json", "library match: split");

        GbmParams params;
        params.m_trees = 20;
        params.max_depth = 3;
        params.min_samples_leaf = 5;
        params.learning_rate = 0.1;
        params.huber = HuberConfig::quantile(0.9);
        const GbmModel model = fit(data.select_rows(sp.train), params);
        check_bytes(model.to_json().dump(2) + "\n", "model.json", "library match: train");

        const auto preds = model.predict(data);
        std::ostringstream pred_csv;
        pred_csv << "prediction\n";
        for (double p : preds) pred_csv << format_double(p) << '\n';
        check_bytes(pred_csv.str(), "pred.csv", "library match: predict");

        const nlohmann::json eval_doc{
            {"n", data.n()}, {"r2", r_squared(data.y, preds)}, {"rmse", rmse(data.y, preds)}};
        check_bytes(eval_doc.dump(2) + "\n", "eval.json", "library match: eval");

        GbmParams cv_params;
        cv_params.m_trees = 10;
        cv_params.max_depth = 2;
        cv_params.min_samples_leaf = 5;
        cv_params.learning_rate = 0.2;
        cv_params.huber = HuberConfig::quantile(0.9);
        check_bytes(cross_validate(data, cv_params, 5, 9).to_json().dump(2) + "\n", "cv.json",
                    "library match: cv");

        const Grid grid = Grid::from_json(nlohmann::json::parse(grid_doc));
        const auto candidates =
            grid_search(data.select_rows(sp.train), data.select_rows(sp.validation), grid, 1);
        const CandidateResult& best = select_best(candidates, 0.5);
        nlohmann::json cand_docs = nlohmann::json::array();
        for (const auto& c : candidates) cand_docs.push_back(c.to_json());
        const nlohmann::json grid_report{
            {"gap", 0.5}, {"candidates", std::move(cand_docs)}, {"selected", best.to_json()}};
        check_bytes(grid_report.dump(2) + "\n", "grid_report.json", "library match: grid");
        check_bytes(best.model.to_json().dump(2) + "\n", "best.json",
                    "library match: grid model");

        ShapleyConfig shap_cfg;
        shap_cfg.mode = ShapleyConfig::Mode::permutation;
        shap_cfg.n_permutations = 20;
        shap_cfg.seed = 9;
        shap_cfg.background = subsample_background(data, 10, 9);
        const Dataset rows = subsample_background(data, 8, 10);
        const auto predict_fn = make_predictor(model);
        const auto attr =
            shapley_attributions(predict_fn, make_view(rows.x, rows.n(), rows.d()), shap_cfg);
        std::vector<std::string> names;
        for (const auto& f : schema.features) names.push_back(f.name);
        const auto imp = importance(attr, names);
        const nlohmann::json shap_doc{{"attributions", attr.to_json()},
                                      {"importance", imp.to_json()}};
        check_bytes(shap_doc.dump(2) + "\n", "shap.json", "library match: shap");
        check_bytes(render_importance_svg(imp), "importance.svg", "library match: shap svg");

        const auto travel = static_cast<std::size_t>(schema.index_of("Travel time per day"));
        const AleCurve curve = ale_curve(predict_fn, data, travel, 6);
        std::ostringstream ale_csv;
        curve.write_csv(ale_csv);
        check_bytes(ale_csv.str(), "ale.csv", "library match: ale csv");
        check_bytes(curve.to_json().dump(2) + "\n", "ale.json", "library match: ale json");
        check_bytes(render_ale_svg(curve, schema.response_name), "ale.svg",
                    "library match: ale svg");

        const auto flag = static_cast<std::size_t>(schema.index_of("Daily Internet use"));
        const BinaryAleEffect effect = ale_binary(predict_fn, data, flag);
        std::ostringstream flag_csv;
        flag_csv << "level,value\n0," << format_double(effect.value_at_0) << "\n1,"
                 << format_double(effect.value_at_1) << '\n';
        check_bytes(flag_csv.str(), "ale_flag.csv", "library match: binary ale csv");
        check_bytes(effect.to_json().dump(2) + "\n", "ale_flag.json",
                    "library match: binary ale json");
        check_bytes(render_ale_svg(effect, schema.response_name), "ale_flag.svg",
                    "library match: binary ale svg");

        RfeOptions rfe_opt;
        rfe_opt.stop_threshold = 0.02;
        rfe_opt.seed = 9;
        rfe_opt.cv_folds = 4;
        rfe_opt.gap = 1.0;
        rfe_opt.shapley_permutations = 6;
        rfe_opt.shapley_background = 8;
        check_bytes(rfe(data, grid, rfe_opt).to_json().dump(2) + "\n", "rfe.json",
                    "library match: rfe");
    }

    // run config round-trips losslessly
    {
        const RunConfig def;
        const RunConfig back = RunConfig::from_json(def.to_json());
        report(back.to_json() == def.to_json(), "run config round trip");
    }

    // documented exit codes on the error paths
    {
        report(run_cmd(cli + " train --data " + s + "/no_such.csv --schema " + s +
                       "/schema.json --out " + s + "/x.json 2>" + s + "/err.txt") == 1,
               "exit 1: missing data file");
        report(slurp(scratch / "err.txt").find("no_such.csv") != std::string::npos,
               "diagnostic names the missing path");
        report(run_cmd(cli + quiet) == 2, "exit 2: no subcommand");
        report(run_cmd(cli + " train --definitely-not-a-flag" + quiet) == 2,
               "exit 2: unknown flag");
        report(run_cmd(cli + " train" + common + quiet) == 2, "exit 2: missing required flag");
        report(run_cmd(cli + " --help" + quiet) == 0, "exit 0: --help");
        for (const std::string sub :
             {"synth", "split", "train", "grid", "cv", "rfe", "predict", "eval", "shap", "ale"})
            report(run_cmd(cli + " " + sub + " --help" + quiet) == 0, "exit 0: " + sub + " --help");

        std::ofstream(scratch / "bad_version.json")
            << R"({"version": 99, "f0": 0, "learning_rate": 1, "schema_fingerprint": )"
            << R"("0000000000000000", "n_features": 1, "stages": []})";
        report(run_cmd(cli + " predict --model " + s + "/bad_version.json" + common + " --out " +
                       s + "/x.csv" + quiet) == 1,
               "exit 1: unknown model version");
        report(run_cmd(cli + " ale --model " + s + "/model.json" + common +
                       " --feature \"No such column\" --out " + s + "/x.csv" + quiet) == 1,
               "exit 1: unknown feature");
    }

    // config file values act as flag defaults, via env var and --config alike
    {
        std::ofstream(scratch / "cfg.json") << R"({"trees": 5, "depth": 2, "lr": 0.2})";
        const std::string train_out = " --out " + s + "/cfg_model.json" + quiet;
        report(run_cmd("TABGBM_CONFIG=" + s + "/cfg.json " + cli + " train" + common +
                       train_out) == 0,
               "exit 0: train with env config");
        const auto model = GbmModel::load(s + "/cfg_model.json");
        report(model.stages.size() == 5, "env config supplied the stage count");
        report(run_cmd(cli + " --config " + s + "/cfg.json train" + common + " --trees 7" +
                       train_out) == 0,
               "exit 0: train with --config and a flag override");
        report(GbmModel::load(s + "/cfg_model.json").stages.size() == 7,
               "flags override config values");

        std::ofstream(scratch / "cfg_grid.json") << R"({"grid": )" << grid_doc << "}";
        report(run_cmd(cli + " --config " + s + "/cfg_grid.json grid" + common + " --splits " +
                       s + "/split.json --gap 0.5 --out " + s + "/cfg_grid_report.json" +
                       quiet) == 0,
               "exit 0: grid from config file");
        report(slurp(scratch / "cfg_grid_report.json") == slurp(g_golden / "grid_report.json"),
               "config-supplied grid matches the flag-supplied run");
    }

    if (update_mode()) {
        std::printf("goldens regenerated under %s\n", g_golden.string().c_str());
        return 0;
    }
    if (g_failures) std::printf("%d golden checks failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
