#include "tabgbm/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "tabgbm/errors.hpp"
#include "tabgbm/numio.hpp"
#include "tabgbm/prng.hpp"

namespace tabgbm {

std::string to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::continuous: return "continuous";
        case FeatureKind::binary: return "binary";
        case FeatureKind::discrete: return "discrete";
    }
    return "continuous";
}

FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "continuous") return FeatureKind::continuous;
    if (s == "binary") return FeatureKind::binary;
    if (s == "discrete") return FeatureKind::discrete;
    throw ParseError("unknown feature kind \"" + s + "\"");
}

bool FeatureSpec::admits(double v) const {
    switch (kind) {
        case FeatureKind::continuous:
            return true;
        case FeatureKind::binary:
            return v == 0.0 || v == 1.0;
        case FeatureKind::discrete:
            return std::find(allowed_values.begin(), allowed_values.end(), v) !=
                   allowed_values.end();
    }
    return false;
}

int Schema::index_of(const std::string& name) const {
    for (std::size_t j = 0; j < features.size(); ++j)
        if (features[j].name == name) return static_cast<int>(j);
    return -1;
}

void Schema::validate() const {
    if (features.empty()) throw SchemaMismatch("schema declares no features");
    std::unordered_set<std::string> seen;
    for (const auto& f : features) {
        if (f.name.empty()) throw SchemaMismatch("feature with empty name");
        if (!seen.insert(f.name).second)
            throw SchemaMismatch("duplicate feature name \"" + f.name + "\"");
        if (f.declared_min > f.declared_max)
            throw SchemaMismatch("feature \"" + f.name + "\" has min > max");
        if (f.kind == FeatureKind::discrete) {
            if (f.allowed_values.empty())
                throw SchemaMismatch("discrete feature \"" + f.name + "\" has no allowed values");
            for (double v : f.allowed_values)
                if (v < f.declared_min || v > f.declared_max)
                    throw SchemaMismatch("allowed value " + format_double(v) +
                                         " of \"" + f.name + "\" is outside [min, max]");
        }
    }
    if (response_name.empty()) throw SchemaMismatch("empty response name");
    if (seen.count(response_name))
        throw SchemaMismatch("response name \"" + response_name + "\" collides with a feature");
}

std::uint64_t Schema::fingerprint() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const char* data, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) {
            h ^= static_cast<unsigned char>(data[i]);
            h *= 1099511628211ull;
        }
    };
    for (const auto& f : features) {
        mix(f.name.data(), f.name.size());
        char kind = static_cast<char>('0' + static_cast<int>(f.kind));
        mix(&kind, 1);
        char sep = '\x1e';
        mix(&sep, 1);
    }
    return h;
}

nlohmann::json Schema::to_json() const {
    nlohmann::json feats = nlohmann::json::array();
    for (const auto& f : features) {
        nlohmann::json jf{{"name", f.name},
                          {"kind", to_string(f.kind)},
                          {"min", f.declared_min},
                          {"max", f.declared_max}};
        if (f.kind == FeatureKind::discrete) jf["allowed_values"] = f.allowed_values;
        feats.push_back(std::move(jf));
    }
    return nlohmann::json{{"features", std::move(feats)}, {"response", response_name}};
}

Schema Schema::from_json(const nlohmann::json& j) {
    Schema s;
    try {
        for (const auto& jf : j.at("features")) {
            FeatureSpec f;
            f.name = jf.at("name").get<std::string>();
            f.kind = feature_kind_from_string(jf.at("kind").get<std::string>());
            f.declared_min = jf.at("min").get<double>();
            f.declared_max = jf.at("max").get<double>();
            if (jf.contains("allowed_values"))
                f.allowed_values = jf.at("allowed_values").get<std::vector<double>>();
            s.features.push_back(std::move(f));
        }
        s.response_name = j.at("response").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("schema document: ") + e.what());
    }
    s.validate();
    return s;
}

Schema Schema::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open schema file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return from_json(j);
}

std::vector<double> Dataset::column(std::size_t j) const {
    std::vector<double> col(n());
    for (std::size_t i = 0; i < n(); ++i) col[i] = at(i, j);
    return col;
}

Dataset Dataset::select_rows(std::span<const std::size_t> indices) const {
    Dataset out;
    out.schema = schema;
    out.x.reserve(indices.size() * d());
    out.y.reserve(indices.size());
    for (std::size_t i : indices) {
        auto r = row(i);
        out.x.insert(out.x.end(), r.begin(), r.end());
        out.y.push_back(y[i]);
    }
    return out;
}

Dataset Dataset::select_features(std::span<const std::size_t> feature_indices) const {
    Dataset out;
    out.schema.response_name = schema.response_name;
    for (std::size_t j : feature_indices) out.schema.features.push_back(schema.features[j]);
    out.y = y;
    out.x.reserve(n() * feature_indices.size());
    for (std::size_t i = 0; i < n(); ++i)
        for (std::size_t j : feature_indices) out.x.push_back(at(i, j));
    return out;
}

nlohmann::json SplitIndices::to_json() const {
    return nlohmann::json{
        {"seed", seed}, {"train", train}, {"validation", validation}, {"test", test}};
}

SplitIndices SplitIndices::from_json(const nlohmann::json& j) {
    SplitIndices s;
    try {
        s.seed = j.at("seed").get<std::uint64_t>();
        s.train = j.at("train").get<std::vector<std::size_t>>();
        s.validation = j.at("validation").get<std::vector<std::size_t>>();
        s.test = j.at("test").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("split document: ") + e.what());
    }
    return s;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace

Dataset read_csv(std::istream& in, const Schema& schema) {
    schema.validate();
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty CSV: no header row");
    const auto header = split_line(strip_cr(line));

    // Map each schema column (features then response) to its file column.
    auto locate = [&header](const std::string& name) {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return c;
        throw MissingColumn(name);
    };
    std::vector<std::size_t> feature_cols;
    feature_cols.reserve(schema.arity());
    for (const auto& f : schema.features) feature_cols.push_back(locate(f.name));
    const std::size_t response_col = locate(schema.response_name);

    Dataset data;
    data.schema = schema;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
        ++row_no;
        const auto fields = split_line(line);
        auto cell = [&](std::size_t col, const std::string& col_name) {
            if (col >= fields.size() || fields[col].empty())
                throw MissingValue(row_no, col_name);
            auto v = parse_double(fields[col]);
            if (!v) throw TypeViolation(row_no, col_name, "non-numeric token \"" + fields[col] + "\"");
            return *v;
        };
        for (std::size_t j = 0; j < schema.arity(); ++j) {
            const auto& f = schema.features[j];
            double v = cell(feature_cols[j], f.name);
            if (!f.admits(v)) {
                if (f.kind == FeatureKind::binary)
                    throw TypeViolation(row_no, f.name,
                                        "binary value " + format_double(v) + " not in {0,1}");
                throw DomainViolation(row_no, f.name, v);
            }
            data.x.push_back(v);
        }
        data.y.push_back(cell(response_col, schema.response_name));
    }
    if (data.y.empty()) throw EmptyInput("CSV has no data rows");
    return data;
}

Dataset load_csv(const std::string& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open data file: " + path);
    return read_csv(in, schema);
}

void write_csv(std::ostream& out, const Dataset& data) {
    for (const auto& f : data.schema.features) out << f.name << ',';
    out << data.schema.response_name << '\n';
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (std::size_t j = 0; j < data.d(); ++j) out << format_double(data.at(i, j)) << ',';
        out << format_double(data.y[i]) << '\n';
    }
}

void write_csv(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open output file: " + path);
    write_csv(out, data);
}

double midpoint_encode(double range_low, double range_high) {
    if (range_low > range_high) throw InvalidRange(range_low, range_high);
    return (range_low + range_high) / 2.0;
}

SplitIndices split(const Dataset& data, double f_train, double f_val, double f_test,
                   std::uint64_t seed) {
    if (f_train <= 0 || f_val <= 0 || f_test <= 0)
        throw BadFractions("all fractions must be positive");
    if (std::abs(f_train + f_val + f_test - 1.0) > 1e-9)
        throw BadFractions("fractions sum to " + format_double(f_train + f_val + f_test));

    const std::size_t n = data.n();
    Rng rng(seed);
    auto order = rng.permutation(n);

    const auto n_train = static_cast<std::size_t>(std::floor(f_train * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::floor(f_val * static_cast<double>(n)));

    SplitIndices s;
    s.seed = seed;
    s.train.assign(order.begin(), order.begin() + n_train);
    s.validation.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    s.test.assign(order.begin() + n_train + n_val, order.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.validation.begin(), s.validation.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

std::vector<std::vector<std::size_t>> kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw BadK("k must be at least 2");
    if (k > n) throw BadK("k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));

    Rng rng(seed);
    auto order = rng.permutation(n);

    std::vector<std::vector<std::size_t>> folds(k);
    const std::size_t base = n / k;
    const std::size_t extra = n % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        folds[f].assign(order.begin() + pos, order.begin() + pos + size);
        std::sort(folds[f].begin(), folds[f].end());
        pos += size;
    }
    return folds;
}

namespace {

ColumnSummary summarize_column(const std::string& name, const std::vector<double>& v) {
    ColumnSummary s;
    s.name = name;
    s.min = *std::min_element(v.begin(), v.end());
    s.max = *std::max_element(v.begin(), v.end());
    double sum = 0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std_dev = std::sqrt(ss / static_cast<double>(v.size()));
    return s;
}

}  // namespace

std::vector<ColumnSummary> summarize(const Dataset& data) {
    std::vector<ColumnSummary> out;
    out.reserve(data.d() + 1);
    for (std::size_t j = 0; j < data.d(); ++j)
        out.push_back(summarize_column(data.schema.features[j].name, data.column(j)));
    out.push_back(summarize_column(data.schema.response_name, data.y));
    return out;
}

// ---- synthetic generator ----

namespace {

std::string to_string(SynthTransform t) {
    return t == SynthTransform::identity ? "identity" : "ln1p_div20";
}

SynthTransform transform_from_string(const std::string& s) {
    if (s == "identity") return SynthTransform::identity;
    if (s == "ln1p_div20") return SynthTransform::ln1p_div20;
    throw ParseError("unknown transform \"" + s + "\"");
}

double apply_transform(SynthTransform t, double v) {
    return t == SynthTransform::identity ? v : std::log1p(v / 20.0);
}

}  // namespace

nlohmann::json SynthConfig::to_json() const {
    nlohmann::json coeffs = nlohmann::json::object();
    nlohmann::json transforms = nlohmann::json::object();
    nlohmann::json means = nlohmann::json::object();
    for (std::size_t j = 0; j < schema.arity(); ++j) {
        const auto& name = schema.features[j].name;
        coeffs[name] = terms[j].weight;
        if (terms[j].transform != SynthTransform::identity)
            transforms[name] = to_string(terms[j].transform);
        if (schema.features[j].kind == FeatureKind::binary) means[name] = binary_means[j];
    }
    return nlohmann::json{{"n", n},
                          {"seed", seed},
                          {"c0", c0},
                          {"noise_sd", noise_sd},
                          {"schema", schema.to_json()},
                          {"coefficients", std::move(coeffs)},
                          {"transforms", std::move(transforms)},
                          {"binary_means", std::move(means)}};
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
    SynthConfig c;
    try {
        c.n = j.at("n").get<std::size_t>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.c0 = j.at("c0").get<double>();
        c.noise_sd = j.at("noise_sd").get<double>();
        c.schema = Schema::from_json(j.at("schema"));
        c.terms.assign(c.schema.arity(), SynthTerm{});
        c.binary_means.assign(c.schema.arity(), 0.5);
        auto index_or_throw = [&c](const std::string& name) {
            int idx = c.schema.index_of(name);
            if (idx < 0) throw ParseError("generator entry for unknown feature \"" + name + "\"");
            return static_cast<std::size_t>(idx);
        };
        if (j.contains("coefficients"))
            for (const auto& [name, w] : j.at("coefficients").items())
                c.terms[index_or_throw(name)].weight = w.get<double>();
        if (j.contains("transforms"))
            for (const auto& [name, t] : j.at("transforms").items())
                c.terms[index_or_throw(name)].transform =
                    transform_from_string(t.get<std::string>());
        if (j.contains("binary_means"))
            for (const auto& [name, p] : j.at("binary_means").items())
                c.binary_means[index_or_throw(name)] = p.get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("generator config: ") + e.what());
    }
    if (c.noise_sd < 0) throw ParseError("noise_sd must be >= 0");
    return c;
}

SynthConfig SynthConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open generator config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return from_json(j);
}

Dataset synth(const SynthConfig& config) {
    if (config.n == 0) throw EmptyInput("generator row count is 0");
    config.schema.validate();
    if (config.terms.size() != config.schema.arity())
        throw SchemaMismatch("generator coefficient table does not match schema arity");

    Rng rng(config.seed);
    Dataset data;
    data.schema = config.schema;
    data.x.reserve(config.n * config.schema.arity());
    data.y.reserve(config.n);

    for (std::size_t i = 0; i < config.n; ++i) {
        double mu = config.c0;
        for (std::size_t j = 0; j < config.schema.arity(); ++j) {
            const auto& f = config.schema.features[j];
            double v = 0;
            switch (f.kind) {
                case FeatureKind::continuous:
                    v = rng.uniform(f.declared_min, f.declared_max);
                    break;
                case FeatureKind::binary:
                    v = rng.bernoulli(config.binary_means[j]) ? 1.0 : 0.0;
                    break;
                case FeatureKind::discrete:
                    v = f.allowed_values[rng.bounded(f.allowed_values.size())];
                    break;
            }
            data.x.push_back(v);
            mu += config.terms[j].weight * apply_transform(config.terms[j].transform, v);
        }
        if (config.noise_sd > 0) mu += config.noise_sd * rng.gaussian();
        data.y.push_back(std::max(0.0, std::round(mu)));
    }
    return data;
}

}  // namespace tabgbm
