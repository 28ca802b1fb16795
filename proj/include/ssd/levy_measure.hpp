#pragma once

#include "ssd/lattice_mass.hpp"
#include "ssd/types.hpp"

#include <string>
#include <variant>
#include <vector>

namespace ssd {

struct Atom {
    Vec x;
    double w = 0.0;
};

/// Masses m(k) at the points anchor * base^k * direction, k in Z.
struct ScaleLattice {
    Vec direction;  // unit vector
    double base = 2.0;
    double anchor = 1.0;
    LatticeMass mass;

    double radius(std::int64_t k) const;
    /// Largest k with radius(k) <= 1.
    std::int64_t last_inside_unit() const;
};

// ---------------------------------------------------------------------------
// k-functions and radial densities

/// Nonincreasing right-continuous k(r) on (0, inf).
struct KShape {
    enum class Kind { Exp, Steps, Constant };
    Kind kind = Kind::Constant;
    double a = 0.0;       // Exp: a e^{-lambda r}; Constant: a
    double lambda = 0.0;
    std::vector<double> cuts;    // Steps: k = values[i] on [cuts[i-1], cuts[i])
    std::vector<double> values;  // size cuts.size() + 1

    static KShape exp(double a, double lambda);
    static KShape steps(std::vector<double> cuts, std::vector<double> values);
    static KShape indicator(double R) { return steps({R}, {1.0, 0.0}); }
    static KShape constant(double a);

    double operator()(double r) const;
    bool nonincreasing() const;
};

struct KFunction {
    struct Direction {
        Vec direction;
        double lambda = 1.0;  // spherical weight
        KShape k;
    };
    std::vector<Direction> parts;
};

struct TemperedStable {
    double w = 1.0;
    double alpha = 0.5;  // alpha < 2
    double lambda = 1.0;
};

struct KDifference {
    KShape k;
    double b = 2.0;
    double weight = 1.0;  // spherical weight folded into the density
};

/// nu restricted to the ray {s xi : s > 0}, nu(ds) = h(s) ds.
struct RadialDensity {
    Vec direction;
    std::variant<TemperedStable, KDifference> family;

    double h(double s) const;
    /// Points where h is not smooth.
    std::vector<double> breakpoints() const;
    /// Compact support [lo, hi] when known (0 / inf otherwise).
    std::pair<double, double> support() const;
    /// Upper bound for int_0^s t^p h(t) dt, p >= 2.
    double small_tail(double s, int p) const;
    /// Upper bound for int_s^inf (log t)^i h(t) dt, s >= 1.
    double large_tail(double s, int i) const;
};

class LevyMeasure {
public:
    std::vector<Atom> atoms;
    std::vector<ScaleLattice> lattices;
    std::vector<RadialDensity> radials;

    bool empty() const { return atoms.empty() && lattices.empty() && radials.empty(); }
    bool exact() const { return radials.empty(); }

    LevyMeasure& add_atom(Vec x, double w);
    LevyMeasure& add_lattice(Vec direction, double base, double anchor, LatticeMass mass);
    LevyMeasure& add_radial(RadialDensity r);
    LevyMeasure& operator+=(const LevyMeasure& other);
};

/// Radial density of (k(r) - k(b r)) / r for each direction of a k-function.
LevyMeasure k_difference_measure(const KFunction& k, double b);

}  // namespace ssd
