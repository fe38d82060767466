#pragma once

#include <stdexcept>
#include <string>

namespace fmloc {

/// Base class for every error raised by the library. `kind()` is a stable
/// short name used in CLI messages and JSON diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)), detail_(what) {}

    const std::string& kind() const noexcept { return kind_; }
    /// Message without the kind prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string kind_;
    std::string detail_;
};

// Input and validation failures (CLI exit code 2).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error("ParseError", what) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error("ValidationError", what) {}
};

class IOError : public Error {
public:
    explicit IOError(const std::string& what) : Error("IOError", what) {}
};

class EmptySubmesh : public Error {
public:
    explicit EmptySubmesh(const std::string& what) : Error("EmptySubmesh", what) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error("DimensionMismatch", what) {}
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error("InvalidArgument", what) {}
};

class ResolutionUnachievable : public Error {
public:
    explicit ResolutionUnachievable(const std::string& what)
        : Error("ResolutionUnachievable", what) {}
};

// Numerical failures (CLI exit code 3).
class DegenerateElement : public Error {
public:
    explicit DegenerateElement(const std::string& what) : Error("DegenerateElement", what) {}
};

class ConvergenceFailure : public Error {
public:
    ConvergenceFailure(const std::string& what, double residual)
        : Error("ConvergenceFailure", what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class RankDeficient : public Error {
public:
    explicit RankDeficient(const std::string& what) : Error("RankDeficient", what) {}
};

class NoNonzeroEigenvalue : public Error {
public:
    explicit NoNonzeroEigenvalue(const std::string& what) : Error("NoNonzeroEigenvalue", what) {}
};

// Calibration/diagnosis configuration disagreement (CLI exit code 4).
class ConfigMismatch : public Error {
public:
    explicit ConfigMismatch(const std::string& what) : Error("ConfigMismatch", what) {}
};

} // namespace fmloc
