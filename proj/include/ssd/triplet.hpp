#pragma once

#include "ssd/levy_measure.hpp"
#include "ssd/point_sum.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ssd {

/// Levy-Khintchine triplet (A, nu, gamma) with centering x / (1 + |x|^2).
struct LevyTriplet {
    Mat A;
    LevyMeasure nu;
    Vec gamma;

    int dim() const { return static_cast<int>(gamma.size()); }

    static LevyTriplet zero(int d);
    static LevyTriplet gaussian(const Mat& A);
    /// Compound Poisson with the given jump atoms and zero centering drift, so that
    /// C(z) = sum_i w_i (e^{i<z,x_i>} - 1).
    static LevyTriplet compound_poisson(const std::vector<Atom>& atoms);
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> violations;
    /// First offending lattice index (component, index) for negative mass.
    std::optional<std::pair<std::size_t, std::int64_t>> first_negative;

    void fail(std::string what) {
        ok = false;
        violations.push_back(std::move(what));
    }
};

ValidationReport validate(const LevyTriplet& t);

/// int min(|x|^2, 1) nu(dx), +inf when divergent (absolute masses).
double small_jump_integral(const LevyMeasure& nu);

/// int_{|x| > 1} (log |x|)^p |nu|(dx), +inf when divergent.
double log_moment(const LevyMeasure& nu, int p);

/// Law of a X for X ~ t, a != 0 (centering-consistent drift).
LevyTriplet scaled_law(const LevyTriplet& t, double a);
/// t^{*s}: every component multiplied by s > 0.
LevyTriplet convolution_power(const LevyTriplet& t, double s);

/// Cumulant C(z) with an absolute error bound.
Bounded<Complex> cumulant(const LevyTriplet& t, const Vec& z, double tol = 1e-12);

// Numerically careful pieces of the Levy-Khintchine integrand.
namespace lk {
/// sin(u) - u without cancellation for small u.
double sin_minus(double u);
/// e^{iu} - 1.
Complex expm1_i(double u);
/// e^{iu} - 1 - iu.
Complex expm1_i_minus(double u);
/// r^2 / (1 + r^2) and 1 / (1 + r^2) without overflow.
double r2_ratio(double r);
double centering(double r);
}  // namespace lk

Envelope cumulant_envelope(double znorm);

struct PolarComponent {
    Vec direction;
    double lambda = 1.0;
    std::vector<std::pair<double, double>> radial_atoms;  // (radius, mass)
    std::vector<ScaleLattice> radial_lattices;            // same lattices, direction kept
};

/// Group an exact measure by direction, with lambda = 1 per occupied direction.
std::vector<PolarComponent> polar_atoms(const LevyMeasure& nu);

/// Directions are identified up to this tolerance throughout.
bool same_direction(const Vec& a, const Vec& b);

}  // namespace ssd
