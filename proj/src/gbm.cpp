#include "tabgbm/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "tabgbm/errors.hpp"

namespace tabgbm {

HuberConfig HuberConfig::fixed(double delta) {
    if (!(delta > 0)) throw BadDelta(delta);
    HuberConfig c;
    c.mode = Mode::fixed;
    c.delta = delta;
    return c;
}

HuberConfig HuberConfig::quantile(double alpha) {
    if (!(alpha > 0) || alpha > 1) throw Error("huber quantile alpha must be in (0, 1]");
    HuberConfig c;
    c.mode = Mode::quantile;
    c.alpha = alpha;
    return c;
}

nlohmann::json HuberConfig::to_json() const {
    if (mode == Mode::fixed) return nlohmann::json{{"mode", "fixed"}, {"delta", delta}};
    return nlohmann::json{{"mode", "quantile"}, {"alpha", alpha}};
}

HuberConfig HuberConfig::from_json(const nlohmann::json& j) {
    try {
        const auto mode = j.at("mode").get<std::string>();
        if (mode == "fixed") return fixed(j.at("delta").get<double>());
        if (mode == "quantile") return quantile(j.at("alpha").get<double>());
        throw ParseError("unknown huber mode \"" + mode + "\"");
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("huber config: ") + e.what());
    }
}

void GbmParams::validate() const {
    if (!(learning_rate > 0) || learning_rate > 1)
        throw Error("learning rate must be in (0, 1]");
    if (max_depth < 1 || min_samples_leaf < 1)
        throw Error("tree params must be strictly positive");
    if (!(line_search_tol > 0)) throw Error("line search tolerance must be > 0");
    if (huber.mode == HuberConfig::Mode::fixed && !(huber.delta > 0)) throw BadDelta(huber.delta);
}

nlohmann::json GbmParams::to_json() const {
    return nlohmann::json{{"m_trees", m_trees},
                          {"max_depth", max_depth},
                          {"min_samples_leaf", min_samples_leaf},
                          {"learning_rate", learning_rate},
                          {"huber", huber.to_json()},
                          {"line_search_tol", line_search_tol}};
}

GbmParams GbmParams::from_json(const nlohmann::json& j) {
    GbmParams p;
    try {
        p.m_trees = j.at("m_trees").get<std::size_t>();
        p.max_depth = j.at("max_depth").get<std::size_t>();
        p.min_samples_leaf = j.at("min_samples_leaf").get<std::size_t>();
        p.learning_rate = j.at("learning_rate").get<double>();
        p.huber = HuberConfig::from_json(j.at("huber"));
        if (j.contains("line_search_tol")) p.line_search_tol = j.at("line_search_tol").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("gbm params: ") + e.what());
    }
    p.validate();
    return p;
}

double huber_loss(double y, double f, double delta) {
    if (!(delta > 0)) throw BadDelta(delta);
    const double r = std::abs(y - f);
    if (r <= delta) return 0.5 * r * r;
    return r * delta - 0.5 * delta * delta;
}

double huber_neg_gradient(double y, double f, double delta) {
    if (!(delta > 0)) throw BadDelta(delta);
    const double r = y - f;
    if (std::abs(r) <= delta) return r;
    return r > 0 ? delta : -delta;
}

double resolve_delta(std::span<const double> residuals, const HuberConfig& huber) {
    if (huber.mode == HuberConfig::Mode::fixed) return huber.delta;
    if (residuals.empty()) throw EmptyResiduals();
    std::vector<double> abs(residuals.size());
    for (std::size_t i = 0; i < residuals.size(); ++i) abs[i] = std::abs(residuals[i]);
    std::sort(abs.begin(), abs.end());
    const auto n = static_cast<double>(abs.size());
    auto rank = static_cast<std::size_t>(std::ceil(huber.alpha * n));
    rank = std::clamp<std::size_t>(rank, 1, abs.size());
    return std::max(abs[rank - 1], 1e-12);
}

namespace {

// Minimizes a convex piecewise-smooth objective on [lo, hi] by bisecting on
// the sign of its subgradient, shrinking the bracket until its width drops
// below tol. Differencing the objective itself stalls near a flat quadratic
// minimum (value changes fall under double resolution at ~sqrt(eps) of the
// scale); the subgradient stays resolvable there, so this search reaches any
// requested tolerance.
template <typename Grad>
double bisect_min(Grad&& subgrad, double lo, double hi, double tol) {
    if (!(hi - lo > tol)) return (lo + hi) / 2.0;
    const int iters = static_cast<int>(std::ceil(std::log2((hi - lo) / tol)));
    double a = lo, b = hi;
    for (int it = 0; it < iters && b - a > tol; ++it) {
        const double mid = a + (b - a) / 2.0;
        if (subgrad(mid) < 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    return (a + b) / 2.0;
}

// Nearest-rank median.
double median(std::span<const double> v) {
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.5 * static_cast<double>(s.size())));
    return s[rank - 1];
}

}  // namespace

double init_f0(std::span<const double> y, const HuberConfig& huber, double tol) {
    if (y.empty()) throw EmptyInput("init_f0 requires a nonempty response");
    const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
    const double lo = *lo_it, hi = *hi_it;
    if (lo == hi) return lo;

    double delta;
    if (huber.mode == HuberConfig::Mode::fixed) {
        delta = huber.delta;
    } else {
        // No running residuals exist yet; anchor the quantile at the median.
        const double med = median(y);
        std::vector<double> r(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i] - med;
        delta = resolve_delta(r, huber);
    }

    // d/drho of total loss: minus the sum of clipped residuals.
    auto subgrad = [&](double rho) {
        double g = 0;
        for (double v : y) g -= huber_neg_gradient(v, rho, delta);
        return g;
    };
    return bisect_min(subgrad, lo, hi, tol);
}

double line_search_rho(std::span<const double> y, std::span<const double> f_prev,
                       std::span<const double> h_vals, double delta, double tol) {
    if (y.size() != f_prev.size()) throw LengthMismatch(y.size(), f_prev.size());
    if (y.size() != h_vals.size()) throw LengthMismatch(y.size(), h_vals.size());
    if (!(tol > 0)) throw Error("line search tolerance must be > 0");
    if (std::all_of(h_vals.begin(), h_vals.end(), [](double h) { return h == 0.0; })) return 0.0;

    auto phi = [&](double rho) {
        double s = 0;
        for (std::size_t i = 0; i < y.size(); ++i)
            s += huber_loss(y[i], f_prev[i] + rho * h_vals[i], delta);
        return s;
    };

    // The objective is convex and coercive, so once both endpoints sit at or
    // above phi(0) the bracket contains a global minimizer.
    const double phi0 = phi(0.0);
    double t = 1.0;
    for (int guard = 0; guard < 200 && (phi(t) < phi0 || phi(-t) < phi0); ++guard) t *= 2.0;

    auto subgrad = [&](double rho) {
        double g = 0;
        for (std::size_t i = 0; i < y.size(); ++i)
            g -= h_vals[i] * huber_neg_gradient(y[i], f_prev[i] + rho * h_vals[i], delta);
        return g;
    };
    const double rho = bisect_min(subgrad, -t, t, tol);
    return phi(rho) > phi0 ? 0.0 : rho;
}

GbmModel fit(const Dataset& train, const GbmParams& params) {
    params.validate();
    const std::size_t n = train.n();
    if (n == 0) throw EmptyInput("training set is empty");

    const MatrixView x = make_view(train.x, n, train.d());
    const std::span<const double> y(train.y);

    GbmModel model;
    model.learning_rate = params.learning_rate;
    model.schema_fingerprint = train.schema.fingerprint();
    model.n_features = train.d();
    model.f0 = init_f0(y, params.huber, params.line_search_tol);
    model.stages.reserve(params.m_trees);

    const TreeParams tree_params{params.max_depth, params.min_samples_leaf};
    std::vector<double> f(n, model.f0);
    std::vector<double> residuals(n), gradients(n), h(n);

    for (std::size_t m = 0; m < params.m_trees; ++m) {
        for (std::size_t i = 0; i < n; ++i) residuals[i] = y[i] - f[i];
        const double delta = resolve_delta(residuals, params.huber);
        for (std::size_t i = 0; i < n; ++i) gradients[i] = huber_neg_gradient(y[i], f[i], delta);

        RegressionTree tree = fit_tree(x, gradients, tree_params);
        tree.predict_batch(x, h);

        double rho = line_search_rho(y, f, h, delta, params.line_search_tol);

        // The shrunken step must never increase the training loss; if rounding
        // in the 1-D search ever yields an uphill step, the stage is zeroed.
        const double scale = params.learning_rate * rho;
        double before = 0, after = 0;
        for (std::size_t i = 0; i < n; ++i) {
            before += huber_loss(y[i], f[i], delta);
            after += huber_loss(y[i], f[i] + scale * h[i], delta);
        }
        if (after > before) rho = 0.0;

        const double step = params.learning_rate * rho;
        for (std::size_t i = 0; i < n; ++i) f[i] += step * h[i];
        model.stages.push_back(GbmStage{std::move(tree), rho});
    }
    return model;
}

double GbmModel::predict_row(std::span<const double> row) const {
    if (row.size() != n_features) throw ArityMismatch(n_features, row.size());
    double acc = f0;
    for (const auto& stage : stages) acc += learning_rate * stage.rho * stage.tree.predict(row);
    return acc;
}

std::vector<double> GbmModel::predict(MatrixView x) const {
    if (x.cols != n_features) throw ArityMismatch(n_features, x.cols);
    std::vector<double> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict_row(x.row(i));
    return out;
}

std::vector<double> GbmModel::predict(const Dataset& data) const {
    if (data.schema.fingerprint() != schema_fingerprint)
        throw SchemaMismatch("dataset schema does not match the model's training schema");
    return predict(make_view(data.x, data.n(), data.d()));
}

namespace {

std::string fingerprint_to_hex(std::uint64_t fp) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fp;
    return os.str();
}

std::uint64_t fingerprint_from_hex(const std::string& s) {
    if (s.size() != 16) throw ParseError("schema fingerprint must be 16 hex digits");
    std::uint64_t fp = 0;
    for (char c : s) {
        fp <<= 4;
        if (c >= '0' && c <= '9') fp |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') fp |= static_cast<std::uint64_t>(c - 'a' + 10);
        else throw ParseError("schema fingerprint must be lowercase hex");
    }
    return fp;
}

constexpr int kModelVersion = 1;

}  // namespace

nlohmann::json GbmModel::to_json() const {
    nlohmann::json stages_j = nlohmann::json::array();
    for (const auto& stage : stages)
        stages_j.push_back(nlohmann::json{{"rho", stage.rho}, {"tree", stage.tree.to_json()}});
    return nlohmann::json{{"version", kModelVersion},
                          {"f0", f0},
                          {"learning_rate", learning_rate},
                          {"schema_fingerprint", fingerprint_to_hex(schema_fingerprint)},
                          {"n_features", n_features},
                          {"stages", std::move(stages_j)}};
}

GbmModel GbmModel::from_json(const nlohmann::json& j) {
    GbmModel m;
    try {
        const int version = j.at("version").get<int>();
        if (version != kModelVersion)
            throw VersionMismatch("model document version " + std::to_string(version) +
                                  ", expected " + std::to_string(kModelVersion));
        m.f0 = j.at("f0").get<double>();
        m.learning_rate = j.at("learning_rate").get<double>();
        m.schema_fingerprint = fingerprint_from_hex(j.at("schema_fingerprint").get<std::string>());
        m.n_features = j.at("n_features").get<std::size_t>();
        for (const auto& js : j.at("stages")) {
            GbmStage stage;
            stage.rho = js.at("rho").get<double>();
            stage.tree = RegressionTree::from_json(js.at("tree"), m.n_features);
            m.stages.push_back(std::move(stage));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model document: ") + e.what());
    }
    return m;
}

void GbmModel::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open output file: " + path);
    out << to_json().dump(2) << '\n';
}

GbmModel GbmModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return from_json(j);
}

}  // namespace tabgbm
