#include "tabgbm/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "tabgbm/errors.hpp"

namespace tabgbm {

std::string to_string(BaselineBasis basis) {
    return basis == BaselineBasis::linear ? "linear" : "quadratic";
}

BaselineBasis baseline_basis_from_string(const std::string& s) {
    if (s == "linear") return BaselineBasis::linear;
    if (s == "quadratic") return BaselineBasis::quadratic;
    throw ParseError("unknown baseline basis \"" + s + "\"");
}

double r_squared(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size()) throw LengthMismatch(y.size(), yhat.size());
    if (y.empty()) throw EmptyInput("r_squared requires observations");
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    if (*lo == *hi) throw DegenerateResponse();

    double mean = 0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());

    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    if (ss_tot == 0) throw DegenerateResponse();
    return 1.0 - ss_res / ss_tot;
}

double rmse(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size()) throw LengthMismatch(y.size(), yhat.size());
    if (y.empty()) throw EmptyInput("rmse requires observations");
    double ss = 0;
    for (std::size_t i = 0; i < y.size(); ++i) ss += (yhat[i] - y[i]) * (yhat[i] - y[i]);
    return std::sqrt(ss / static_cast<double>(y.size()));
}

namespace {

std::vector<std::string> basis_term_names(const Schema& schema, BaselineBasis basis) {
    std::vector<std::string> names;
    for (const auto& f : schema.features) names.push_back(f.name);
    if (basis == BaselineBasis::quadratic) {
        for (const auto& f : schema.features) names.push_back(f.name + "^2");
        for (std::size_t j = 0; j < schema.arity(); ++j)
            for (std::size_t k = j + 1; k < schema.arity(); ++k)
                names.push_back(schema.features[j].name + "*" + schema.features[k].name);
    }
    return names;
}

void expand_row(std::span<const double> row, BaselineBasis basis, std::vector<double>& terms) {
    terms.assign(row.begin(), row.end());
    if (basis == BaselineBasis::quadratic) {
        for (double v : row) terms.push_back(v * v);
        for (std::size_t j = 0; j < row.size(); ++j)
            for (std::size_t k = j + 1; k < row.size(); ++k) terms.push_back(row[j] * row[k]);
    }
}

}  // namespace

LinearModel fit_baseline(const Dataset& train, BaselineBasis basis) {
    const std::size_t n = train.n();
    if (n == 0) throw EmptyInput("baseline fit requires rows");

    auto names = basis_term_names(train.schema, basis);
    const std::size_t p = names.size();

    Eigen::MatrixXd design(n, p + 1);
    std::vector<double> terms;
    for (std::size_t i = 0; i < n; ++i) {
        design(static_cast<Eigen::Index>(i), 0) = 1.0;
        expand_row(train.row(i), basis, terms);
        for (std::size_t t = 0; t < p; ++t)
            design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t + 1)) = terms[t];
    }
    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs(static_cast<Eigen::Index>(i)) = train.y[i];

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    const auto rank = static_cast<std::size_t>(qr.rank());
    if (rank < p + 1) {
        // The first `rank` pivots span the column space; the lowest-indexed
        // column outside that set is the dependent term to report.
        const auto& perm = qr.colsPermutation().indices();
        std::vector<bool> pivoted(p + 1, false);
        for (std::size_t r = 0; r < rank; ++r)
            pivoted[static_cast<std::size_t>(perm(static_cast<Eigen::Index>(r)))] = true;
        for (std::size_t c = 0; c <= p; ++c)
            if (!pivoted[c]) throw RankDeficient(c == 0 ? "intercept" : names[c - 1]);
    }
    Eigen::VectorXd coef = qr.solve(rhs);

    LinearModel model;
    model.basis = basis;
    model.intercept = coef(0);
    model.coefficients.resize(p);
    for (std::size_t t = 0; t < p; ++t)
        model.coefficients[t] = coef(static_cast<Eigen::Index>(t + 1));
    model.term_names = std::move(names);
    model.n_features = train.d();
    return model;
}

std::vector<double> predict_baseline(const LinearModel& model, MatrixView x) {
    if (x.cols != model.n_features) throw ArityMismatch(model.n_features, x.cols);
    std::vector<double> out(x.rows);
    std::vector<double> terms;
    for (std::size_t i = 0; i < x.rows; ++i) {
        expand_row(x.row(i), model.basis, terms);
        double acc = model.intercept;
        for (std::size_t t = 0; t < terms.size(); ++t) acc += model.coefficients[t] * terms[t];
        out[i] = acc;
    }
    return out;
}

nlohmann::json LinearModel::to_json() const {
    return nlohmann::json{{"basis", to_string(basis)},
                          {"intercept", intercept},
                          {"coefficients", coefficients},
                          {"term_names", term_names},
                          {"n_features", n_features}};
}

LinearModel LinearModel::from_json(const nlohmann::json& j) {
    LinearModel m;
    try {
        m.basis = baseline_basis_from_string(j.at("basis").get<std::string>());
        m.intercept = j.at("intercept").get<double>();
        m.coefficients = j.at("coefficients").get<std::vector<double>>();
        m.term_names = j.at("term_names").get<std::vector<std::string>>();
        m.n_features = j.at("n_features").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("baseline document: ") + e.what());
    }
    return m;
}

}  // namespace tabgbm
