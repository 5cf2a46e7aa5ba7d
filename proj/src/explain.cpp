#include "tabgbm/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <ostream>

#include "tabgbm/errors.hpp"
#include "tabgbm/numio.hpp"
#include "tabgbm/parallel.hpp"
#include "tabgbm/prng.hpp"

namespace tabgbm {

PredictFn make_predictor(const GbmModel& model) {
    return [m = &model](std::span<const double> row) { return m->predict_row(row); };
}

namespace {

// Coalition weights |S|!(d-|S|-1)!/d! for all coalition sizes; exact in
// double up to d = 14 (14! < 2^53).
std::vector<double> coalition_weights(std::size_t d) {
    std::vector<double> fact(d + 1, 1.0);
    for (std::size_t i = 1; i <= d; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
    std::vector<double> w(d);
    for (std::size_t s = 0; s < d; ++s) w[s] = fact[s] * fact[d - 1 - s] / fact[d];
    return w;
}

void exact_attributions(const PredictFn& predict_fn, MatrixView x, const Dataset& background,
                        std::size_t i, std::span<const double> weights, std::span<double> phi_row) {
    const std::size_t d = x.cols;
    const std::size_t n_masks = std::size_t{1} << d;
    const auto row = x.row(i);

    // Value of every coalition: features in the mask come from the instance,
    // the rest from each background row in turn.
    std::vector<double> vals(n_masks);
    std::vector<double> hybrid(d);
    for (std::size_t mask = 0; mask < n_masks; ++mask) {
        double acc = 0;
        for (std::size_t b = 0; b < background.n(); ++b) {
            const auto bg = background.row(b);
            for (std::size_t j = 0; j < d; ++j)
                hybrid[j] = (mask >> j) & 1 ? row[j] : bg[j];
            acc += predict_fn(hybrid);
        }
        vals[mask] = acc / static_cast<double>(background.n());
    }

    for (std::size_t j = 0; j < d; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        double phi = 0;
        for (std::size_t mask = 0; mask < n_masks; ++mask) {
            if (mask & bit) continue;
            phi += weights[std::popcount(mask)] * (vals[mask | bit] - vals[mask]);
        }
        phi_row[j] = phi;
    }
}

void sampled_attributions(const PredictFn& predict_fn, MatrixView x, const Dataset& background,
                          std::size_t i, std::size_t n_permutations, std::uint64_t seed,
                          std::span<double> phi_row) {
    const std::size_t d = x.cols;
    const auto row = x.row(i);
    Rng rng(seed + 0x9e3779b97f4a7c15ull * (i + 1));

    std::fill(phi_row.begin(), phi_row.end(), 0.0);
    std::vector<double> hybrid(d);
    for (std::size_t p = 0; p < n_permutations; ++p) {
        const auto order = rng.permutation(d);
        for (std::size_t b = 0; b < background.n(); ++b) {
            const auto bg = background.row(b);
            std::copy(bg.begin(), bg.end(), hybrid.begin());
            double prev = predict_fn(hybrid);
            for (std::size_t j : order) {
                hybrid[j] = row[j];
                const double cur = predict_fn(hybrid);
                phi_row[j] += cur - prev;
                prev = cur;
            }
        }
    }
    const double norm = static_cast<double>(n_permutations) * static_cast<double>(background.n());
    for (std::size_t j = 0; j < d; ++j) phi_row[j] /= norm;
}

}  // namespace

AttributionMatrix shapley_attributions(const PredictFn& predict_fn, MatrixView x,
                                       const ShapleyConfig& config) {
    const std::size_t d = x.cols;
    if (config.background.n() == 0) throw EmptyBackground();
    if (config.background.d() != d) throw ArityMismatch(d, config.background.d());
    if (config.mode == ShapleyConfig::Mode::exact && d > config.exact_dim_limit)
        throw DimLimitExceeded(d, config.exact_dim_limit);
    if (config.mode == ShapleyConfig::Mode::permutation && config.n_permutations == 0)
        throw Error("permutation mode needs at least one permutation");

    AttributionMatrix out;
    out.n = x.rows;
    out.d = d;
    out.phi.assign(x.rows * d, 0.0);

    double base = 0;
    for (std::size_t b = 0; b < config.background.n(); ++b)
        base += predict_fn(config.background.row(b));
    out.baseline = base / static_cast<double>(config.background.n());

    if (config.mode == ShapleyConfig::Mode::exact) {
        const auto weights = coalition_weights(d);
        parallel_for(x.rows, config.jobs, [&](std::size_t i) {
            exact_attributions(predict_fn, x, config.background, i, weights,
                               std::span<double>(out.phi).subspan(i * d, d));
        });
    } else {
        parallel_for(x.rows, config.jobs, [&](std::size_t i) {
            sampled_attributions(predict_fn, x, config.background, i, config.n_permutations,
                                 config.seed, std::span<double>(out.phi).subspan(i * d, d));
        });
    }
    return out;
}

ImportanceReport importance(const AttributionMatrix& attributions,
                            std::vector<std::string> feature_names) {
    if (attributions.n == 0) throw EmptyInput("attribution matrix has no rows");
    if (feature_names.size() != attributions.d)
        throw LengthMismatch(feature_names.size(), attributions.d);

    ImportanceReport report;
    report.feature_names = std::move(feature_names);
    report.signed_sum.assign(attributions.d, 0.0);
    report.mean_abs.assign(attributions.d, 0.0);
    for (std::size_t i = 0; i < attributions.n; ++i)
        for (std::size_t j = 0; j < attributions.d; ++j) {
            report.signed_sum[j] += attributions.at(i, j);
            report.mean_abs[j] += std::abs(attributions.at(i, j));
        }
    for (std::size_t j = 0; j < attributions.d; ++j)
        report.mean_abs[j] /= static_cast<double>(attributions.n);

    report.ranking.resize(attributions.d);
    std::iota(report.ranking.begin(), report.ranking.end(), 0);
    std::stable_sort(report.ranking.begin(), report.ranking.end(),
                     [&](std::size_t a, std::size_t b) {
                         return report.mean_abs[a] > report.mean_abs[b];
                     });
    return report;
}

Dataset subsample_background(const Dataset& data, std::size_t max_rows, std::uint64_t seed) {
    if (data.n() <= max_rows) return data;
    Rng rng(seed);
    auto order = rng.permutation(data.n());
    order.resize(max_rows);
    std::sort(order.begin(), order.end());
    return data.select_rows(order);
}

namespace {

std::vector<double> sorted_distinct(const std::vector<double>& values) {
    std::vector<double> v = values;
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// Nearest-rank (k/K)-quantile edges over the observed values, with z_0 at the
// minimum and duplicate edges merged.
std::vector<double> quantile_edges(const std::vector<double>& values, std::size_t k_intervals) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());

    std::vector<double> edges{sorted.front()};
    for (std::size_t k = 1; k <= k_intervals; ++k) {
        const double q = static_cast<double>(k) / static_cast<double>(k_intervals);
        auto rank = static_cast<std::size_t>(std::ceil(q * n));
        rank = std::clamp<std::size_t>(rank, 1, sorted.size());
        const double z = sorted[rank - 1];
        if (z > edges.back()) edges.push_back(z);
    }
    return edges;
}

}  // namespace

AleCurve ale_curve(const PredictFn& predict_fn, const Dataset& data, std::size_t feature,
                   std::size_t k_intervals) {
    if (feature >= data.d()) throw ArityMismatch(data.d(), feature);
    const FeatureSpec& spec = data.schema.features[feature];
    if (spec.kind == FeatureKind::binary)
        throw Error("feature \"" + spec.name + "\" is binary; use the binary effect instead");
    if (k_intervals < 1) throw Error("interval count must be >= 1");

    const auto values = data.column(feature);
    const auto distinct = sorted_distinct(values);
    if (distinct.size() < 2) throw ConstantFeature(spec.name);

    // Discrete features use every observed level as an edge so each
    // consecutive level pair forms one bin; continuous features use the
    // quantile grid clamped to distinct-1 intervals.
    std::vector<double> edges;
    if (spec.kind == FeatureKind::discrete) {
        edges = distinct;
    } else {
        edges = quantile_edges(values, std::min(k_intervals, distinct.size() - 1));
    }
    const std::size_t k_eff = edges.size() - 1;

    // Interval of a value: smallest k >= 1 with v <= z_k; the first interval
    // is closed on both ends so the minimum belongs to interval 1.
    auto interval_of = [&edges](double v) {
        const auto it = std::lower_bound(edges.begin() + 1, edges.end(), v);
        return static_cast<std::size_t>(it - edges.begin());
    };

    std::vector<std::size_t> counts(k_eff, 0);
    std::vector<double> deltas(k_eff, 0.0);
    std::vector<double> buf(data.d());
    for (std::size_t i = 0; i < data.n(); ++i) {
        const std::size_t k = interval_of(values[i]);
        const auto row = data.row(i);
        std::copy(row.begin(), row.end(), buf.begin());
        buf[feature] = edges[k];
        const double hi = predict_fn(buf);
        buf[feature] = edges[k - 1];
        const double lo = predict_fn(buf);
        deltas[k - 1] += hi - lo;
        counts[k - 1] += 1;
    }

    AleCurve curve;
    curve.feature = feature;
    curve.feature_name = spec.name;
    curve.edges = edges;
    curve.counts = counts;
    curve.uncentered.assign(k_eff + 1, 0.0);
    for (std::size_t k = 1; k <= k_eff; ++k)
        curve.uncentered[k] =
            curve.uncentered[k - 1] + deltas[k - 1] / static_cast<double>(counts[k - 1]);

    double weighted = 0;
    for (std::size_t k = 1; k <= k_eff; ++k)
        weighted += static_cast<double>(counts[k - 1]) * curve.uncentered[k];
    const double center = weighted / static_cast<double>(data.n());

    curve.centered.resize(k_eff + 1);
    for (std::size_t e = 0; e <= k_eff; ++e) curve.centered[e] = curve.uncentered[e] - center;
    return curve;
}

BinaryAleEffect ale_binary(const PredictFn& predict_fn, const Dataset& data, std::size_t feature) {
    if (feature >= data.d()) throw ArityMismatch(data.d(), feature);
    const FeatureSpec& spec = data.schema.features[feature];
    if (spec.kind != FeatureKind::binary)
        throw Error("feature \"" + spec.name + "\" is not binary");

    std::size_t ones = 0;
    for (std::size_t i = 0; i < data.n(); ++i) ones += data.at(i, feature) == 1.0 ? 1 : 0;
    if (ones == 0 || ones == data.n()) throw ConstantFeature(spec.name);

    double acc = 0;
    std::vector<double> buf(data.d());
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto row = data.row(i);
        std::copy(row.begin(), row.end(), buf.begin());
        buf[feature] = 1.0;
        const double hi = predict_fn(buf);
        buf[feature] = 0.0;
        acc += hi - predict_fn(buf);
    }

    BinaryAleEffect effect;
    effect.feature = feature;
    effect.feature_name = spec.name;
    effect.value_at_1 = acc / static_cast<double>(data.n());
    return effect;
}

nlohmann::json AttributionMatrix::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < n; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < d; ++j) row.push_back(at(i, j));
        rows.push_back(std::move(row));
    }
    return nlohmann::json{{"baseline", baseline}, {"phi", std::move(rows)}};
}

nlohmann::json ImportanceReport::to_json() const {
    nlohmann::json ranked = nlohmann::json::array();
    for (std::size_t j : ranking) ranked.push_back(feature_names[j]);
    return nlohmann::json{{"features", feature_names},
                          {"signed_sum", signed_sum},
                          {"mean_abs", mean_abs},
                          {"ranking", std::move(ranked)}};
}

nlohmann::json AleCurve::to_json() const {
    return nlohmann::json{{"feature", feature},
                          {"name", feature_name},
                          {"edges", edges},
                          {"counts", counts},
                          {"uncentered", uncentered},
                          {"centered", centered}};
}

void AleCurve::write_csv(std::ostream& out) const {
    out << "edge,centered_value,count\n";
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const std::size_t count = e == 0 ? 0 : counts[e - 1];
        out << format_double(edges[e]) << ',' << format_double(centered[e]) << ',' << count
            << '\n';
    }
}

nlohmann::json BinaryAleEffect::to_json() const {
    return nlohmann::json{{"feature", feature},
                          {"name", feature_name},
                          {"value_at_0", value_at_0},
                          {"value_at_1", value_at_1}};
}

}  // namespace tabgbm
