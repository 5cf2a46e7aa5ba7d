#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabgbm/data.hpp"
#include "tabgbm/matrix.hpp"

namespace tabgbm {

enum class BaselineBasis { linear, quadratic };

std::string to_string(BaselineBasis basis);
BaselineBasis baseline_basis_from_string(const std::string& s);

/// Ordinary least squares over a fixed basis expansion of the features:
/// the originals in schema order, then (quadratic only) squares in schema
/// order, then cross products (j < j') lexicographic.
struct LinearModel {
    BaselineBasis basis = BaselineBasis::linear;
    double intercept = 0.0;
    std::vector<double> coefficients;  // one per basis term
    std::vector<std::string> term_names;
    std::size_t n_features = 0;

    nlohmann::json to_json() const;
    static LinearModel from_json(const nlohmann::json& j);
};

/// 1 - SS_res / SS_tot.
double r_squared(std::span<const double> y, std::span<const double> yhat);

double rmse(std::span<const double> y, std::span<const double> yhat);

/// Least squares via column-pivoted Householder QR of the design matrix.
LinearModel fit_baseline(const Dataset& train, BaselineBasis basis);

std::vector<double> predict_baseline(const LinearModel& model, MatrixView x);

}  // namespace tabgbm
