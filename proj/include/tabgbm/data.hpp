#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace tabgbm {

enum class FeatureKind { continuous, binary, discrete };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& s);

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::continuous;
    double declared_min = 0.0;
    double declared_max = 0.0;
    std::vector<double> allowed_values;  // discrete only

    /// True when `v` satisfies this column's kind constraint.
    bool admits(double v) const;
};

struct Schema {
    std::vector<FeatureSpec> features;
    std::string response_name;

    std::size_t arity() const { return features.size(); }
    /// Index of a feature by name, -1 if absent.
    int index_of(const std::string& name) const;
    /// Throws SchemaMismatch when an invariant is violated.
    void validate() const;
    /// FNV-1a 64 over feature names and kinds; identifies the input contract
    /// a model was trained against.
    std::uint64_t fingerprint() const;

    nlohmann::json to_json() const;
    static Schema from_json(const nlohmann::json& j);
    static Schema load(const std::string& path);
};

/// Column-typed numeric matrix with response vector; the carrier every
/// training / evaluation / explanation routine works on.
struct Dataset {
    Schema schema;
    std::vector<double> x;  // row-major, n() * d()
    std::vector<double> y;

    std::size_t n() const { return y.size(); }
    std::size_t d() const { return schema.arity(); }
    double at(std::size_t i, std::size_t j) const { return x[i * d() + j]; }
    std::span<const double> row(std::size_t i) const { return {x.data() + i * d(), d()}; }
    std::vector<double> column(std::size_t j) const;

    Dataset select_rows(std::span<const std::size_t> indices) const;
    /// Keeps only the given feature columns (response untouched).
    Dataset select_features(std::span<const std::size_t> feature_indices) const;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
    static SplitIndices from_json(const nlohmann::json& j);
};

struct ColumnSummary {
    std::string name;
    double min = 0, max = 0, mean = 0, std_dev = 0;
};

// ---- synthetic generator ----

enum class SynthTransform { identity, ln1p_div20 };

struct SynthTerm {
    double weight = 0.0;
    SynthTransform transform = SynthTransform::identity;
};

/// Configuration of the seeded household generator. Feature marginals come
/// from the schema (uniform over [min, max] for continuous, Bernoulli for
/// binary, uniform over allowed values for discrete); the response is
/// max(0, round(c0 + sum_j w_j * g_j(x_j) + gaussian noise)).
struct SynthConfig {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double c0 = 0.0;
    double noise_sd = 0.0;
    Schema schema;
    std::vector<SynthTerm> terms;         // aligned with schema.features
    std::vector<double> binary_means;     // aligned; used for binary features only

    nlohmann::json to_json() const;
    static SynthConfig from_json(const nlohmann::json& j);
    static SynthConfig load(const std::string& path);
};

// ---- operations ----

/// Reads a comma-delimited file with a header row; columns are reordered to
/// schema order, rows kept in file order. Cell-level failures name the
/// 1-based data row and the column.
Dataset load_csv(const std::string& path, const Schema& schema);
Dataset read_csv(std::istream& in, const Schema& schema);

/// Features in schema order, response last; shortest round-trip decimals.
void write_csv(std::ostream& out, const Dataset& data);
void write_csv(const std::string& path, const Dataset& data);

/// Middle of a range-coded survey value.
double midpoint_encode(double range_low, double range_high);

/// Seeded shuffle, then train = floor(f1*N), validation = floor(f2*N),
/// test = remainder; each index list is sorted ascending.
SplitIndices split(const Dataset& data, double f_train, double f_val, double f_test,
                   std::uint64_t seed);

/// k seeded folds partitioning {0..n-1}, sizes within 1 of each other.
std::vector<std::vector<std::size_t>> kfold(std::size_t n, std::size_t k, std::uint64_t seed);

/// Per-column (min, max, mean, population std); features first, response last.
std::vector<ColumnSummary> summarize(const Dataset& data);

Dataset synth(const SynthConfig& config);

}  // namespace tabgbm
