#pragma once

#include "ssd/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ssd {

// Index sentinels for half-infinite ranges. Kept well inside int64 so that
// shifting by moderate amounts never overflows.
inline constexpr std::int64_t kIndexMin = std::numeric_limits<std::int64_t>::min() / 4;
inline constexpr std::int64_t kIndexMax = std::numeric_limits<std::int64_t>::max() / 4;

inline bool is_neg_inf(std::int64_t k) { return k <= kIndexMin; }
inline bool is_pos_inf(std::int64_t k) { return k >= kIndexMax; }

/// q^k * P(k) with P given by monomial coefficients in k.
struct ExpPolyTerm {
    double q = 1.0;
    std::vector<double> poly;

    double at(std::int64_t k) const;
    /// Upper bound for |P(k)| as a polynomial in |k| with nonnegative coefficients.
    std::vector<double> abs_poly() const;
    int degree() const { return static_cast<int>(poly.size()) - 1; }
};

/// w * (k - offset)^(-p) on [lo, hi], with lo - offset >= 1.
struct PowerTerm {
    double w = 0.0;
    double p = 0.0;
    std::int64_t offset = 0;
    std::int64_t lo = 1;
    std::int64_t hi = kIndexMax;

    double at(std::int64_t k) const;
};

struct MassSegment {
    std::int64_t lo;
    std::int64_t hi;
    std::vector<ExpPolyTerm> terms;

    double at(std::int64_t k) const;
};

/// Sum_{j >= J} j^(-s) for s > 1 and J >= 1 (explicit head + Euler-Maclaurin tail).
double zeta_tail(double s, std::int64_t J);

/// Exact symbolic mass law m(k), k in Z, for points of a geometric radius lattice.
///
/// The representation is a sorted list of disjoint integer segments, each carrying a
/// finite sum of exponential-polynomial terms, plus an optional list of power-law
/// terms. Index shifts, sums, differences and upper tail sums are closed under this
/// representation (power terms excepted), which is what makes lattice differencing
/// and pushforward sums exact.
class LatticeMass {
public:
    LatticeMass() = default;

    static LatticeMass geometric(double w, double q, std::int64_t lo = kIndexMin,
                                 std::int64_t hi = kIndexMax);
    static LatticeMass exp_poly(std::vector<double> poly, double q, std::int64_t lo,
                                std::int64_t hi);
    static LatticeMass point(std::int64_t k, double w);
    static LatticeMass power(double w, double p, std::int64_t lo = 1,
                             std::int64_t hi = kIndexMax, std::int64_t offset = 0);

    double at(std::int64_t k) const;
    bool empty() const { return segments_.empty() && powers_.empty(); }
    bool has_power() const { return !powers_.empty(); }

    const std::vector<MassSegment>& segments() const { return segments_; }
    const std::vector<PowerTerm>& power_terms() const { return powers_; }

    /// Lowest / highest index carrying mass (kIndexMin / kIndexMax when unbounded).
    std::int64_t lowest() const;
    std::int64_t highest() const;
    bool finite_support() const { return !is_neg_inf(lowest()) && !is_pos_inf(highest()); }

    /// m'(k) = m(k + s).
    LatticeMass shifted(std::int64_t s) const;
    LatticeMass scaled(double f) const;
    friend LatticeMass operator+(const LatticeMass& a, const LatticeMass& b);
    friend LatticeMass operator-(const LatticeMass& a, const LatticeMass& b);

    /// m'(k) = sum_{i >= k} m(i). Throws Unsupported for power terms and DomainError when
    /// the upper tail diverges.
    LatticeMass upper_tail_sum() const;

    /// sum_{k = lo}^{hi} m(k) (a + b k)^n in closed form; +inf when divergent.
    double poly_moment(std::int64_t lo, std::int64_t hi, double a, double b, int n) const;
    double total(std::int64_t lo = kIndexMin, std::int64_t hi = kIndexMax) const {
        return poly_moment(lo, hi, 1.0, 0.0, 0);
    }

    /// sum_{k = lo}^{hi} M(k) g^k (a + b k)^n where M(k) >= |m(k)| is a term-wise majorant.
    /// The caller guarantees a + b k >= 0 on the range. +inf when divergent.
    double abs_moment(std::int64_t lo, std::int64_t hi, double g, double a, double b, int n) const;
    /// sum_{k = lo}^{hi} m(k) g^k in closed form.
    double tilted_total(std::int64_t lo, std::int64_t hi, double g) const;

    /// Whether sum_{k -> -inf} |m(k)| rho^k converges (rho > 1 for radius powers).
    bool lower_tail_converges(double rho) const;
    /// Whether sum_{k -> +inf} |m(k)| converges.
    bool upper_tail_converges() const;

    struct SignReport {
        bool nonnegative = true;
        std::optional<std::int64_t> first_negative;
        double value_at_violation = 0.0;
    };
    /// Exact nonnegativity decision (up to relative rounding tolerance).
    SignReport check_nonnegative(double rel_tol = 1e-11) const;

    /// Max |m1(k) - m2(k)| over a window, relative to max |m1|; used for comparisons.
    static double max_abs_diff(const LatticeMass& a, const LatticeMass& b, std::int64_t lo,
                               std::int64_t hi);

private:
    static std::vector<MassSegment> normalize(std::vector<MassSegment> raw);

    std::vector<MassSegment> segments_;
    std::vector<PowerTerm> powers_;
};

// Polynomial helpers, exposed for tests.
namespace poly {
std::vector<double> multiply(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> shift(const std::vector<double>& p, double s);  // P(k + s)
double eval(const std::vector<double>& p, double k);
/// Q with Q(k) - q Q(k+1) = P(k), q != 1.
std::vector<double> geometric_antidiff(const std::vector<double>& p, double q);
/// R with R(k+1) - R(k) = P(k), R(0) = 0.
std::vector<double> antidiff(const std::vector<double>& p);
}  // namespace poly

}  // namespace ssd
