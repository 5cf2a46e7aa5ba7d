#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tabgbm {

/// Base class for every error raised by the library. Catching this is enough
/// to map any domain failure to a diagnostic + nonzero exit in the CLI.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// ---- data ingestion ----

class MissingColumn : public Error {
public:
    explicit MissingColumn(const std::string& name)
        : Error("missing column: " + name), column(name) {}
    std::string column;
};

class MissingValue : public Error {
public:
    MissingValue(std::size_t row, const std::string& col)
        : Error("missing value at row " + std::to_string(row) + ", column \"" + col + "\""),
          row(row), column(col) {}
    std::size_t row;
    std::string column;
};

class TypeViolation : public Error {
public:
    TypeViolation(std::size_t row, const std::string& col, const std::string& detail)
        : Error("type violation at row " + std::to_string(row) + ", column \"" + col + "\": " + detail),
          row(row), column(col) {}
    std::size_t row;
    std::string column;
};

class DomainViolation : public Error {
public:
    DomainViolation(std::size_t row, const std::string& col, double value)
        : Error("value " + std::to_string(value) + " at row " + std::to_string(row) +
                " is not in the allowed values of column \"" + col + "\""),
          row(row), column(col), value(value) {}
    std::size_t row;
    std::string column;
    double value;
};

class InvalidRange : public Error {
public:
    InvalidRange(double lo, double hi)
        : Error("invalid range: low " + std::to_string(lo) + " > high " + std::to_string(hi)) {}
};

class BadFractions : public Error {
public:
    explicit BadFractions(const std::string& detail) : Error("bad split fractions: " + detail) {}
};

class BadK : public Error {
public:
    explicit BadK(const std::string& detail) : Error("bad fold count: " + detail) {}
};

// ---- shared numeric / shape errors ----

class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& what) : Error("empty input: " + what) {}
};

class LengthMismatch : public Error {
public:
    LengthMismatch(std::size_t a, std::size_t b)
        : Error("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class ArityMismatch : public Error {
public:
    ArityMismatch(std::size_t expected, std::size_t got)
        : Error("feature arity mismatch: expected " + std::to_string(expected) +
                ", got " + std::to_string(got)) {}
};

class SchemaMismatch : public Error {
public:
    explicit SchemaMismatch(const std::string& detail) : Error("schema mismatch: " + detail) {}
};

// ---- gbm ----

class BadDelta : public Error {
public:
    explicit BadDelta(double delta)
        : Error("huber delta must be > 0, got " + std::to_string(delta)) {}
};

class EmptyResiduals : public Error {
public:
    EmptyResiduals() : Error("empty residual list in quantile delta mode") {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& detail) : Error("parse error: " + detail) {}
};

class VersionMismatch : public Error {
public:
    explicit VersionMismatch(const std::string& detail) : Error("version mismatch: " + detail) {}
};

// ---- metrics ----

class DegenerateResponse : public Error {
public:
    DegenerateResponse() : Error("response is constant; R^2 is undefined") {}
};

class RankDeficient : public Error {
public:
    explicit RankDeficient(const std::string& term)
        : Error("design matrix is rank deficient; dependent basis term: " + term), term(term) {}
    std::string term;
};

// ---- selection ----

class EmptyGrid : public Error {
public:
    EmptyGrid() : Error("hyperparameter grid has an empty value list") {}
};

class NoModelPassesGate : public Error {
public:
    explicit NoModelPassesGate(double gap)
        : Error("every candidate has train-validation R^2 gap >= " + std::to_string(gap)) {}
};

class TooFewFeatures : public Error {
public:
    explicit TooFewFeatures(std::size_t d)
        : Error("recursive elimination needs at least 2 features, got " + std::to_string(d)) {}
};

// ---- explain ----

class DimLimitExceeded : public Error {
public:
    DimLimitExceeded(std::size_t d, std::size_t limit)
        : Error("exact Shapley enumeration limited to " + std::to_string(limit) +
                " features, got " + std::to_string(d)) {}
};

class EmptyBackground : public Error {
public:
    EmptyBackground() : Error("Shapley background sample is empty") {}
};

class ConstantFeature : public Error {
public:
    explicit ConstantFeature(const std::string& name)
        : Error("feature \"" + name + "\" takes a single value; no effect curve exists") {}
};

}  // namespace tabgbm
