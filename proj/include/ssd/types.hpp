#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace ssd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Complex = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Default numerical tolerances shared by every module.
struct Tolerances {
    static constexpr double psd = 1e-12;
    static constexpr double quadrature_rel = 1e-9;
    static constexpr double series = 1e-12;
    static constexpr double mc_multiplier = 3.0;
    static constexpr double span_margin = 1e-9;
};

// Error hierarchy. The CLI maps these onto exit codes.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input (bad JSON, wrong dimensions, out-of-range parameter).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Input outside the domain of an operation (e.g. infinite log-moment).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A series, quadrature or search failed to reach the requested tolerance.
class ToleranceError : public Error {
public:
    ToleranceError(const std::string& what, double achieved)
        : Error(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// The request is well-formed but not representable in the exact data model.
class Unsupported : public Error {
public:
    using Error::Error;
};

/// Value together with an absolute error bound.
template <class T>
struct Bounded {
    T value;
    double err = 0.0;
};

struct SpanConfig {
    double b;

    explicit SpanConfig(double span) : b(span) {
        if (!(span > 1.0 + Tolerances::span_margin) || !std::isfinite(span))
            throw InvalidArgument("span b must satisfy b > 1 (got " + std::to_string(span) + ")");
    }
};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const Complex& v) { return std::abs(v); }
inline double magnitude(const Vec& v) { return v.norm(); }
inline double magnitude(const Mat& v) { return v.norm(); }

}  // namespace ssd
