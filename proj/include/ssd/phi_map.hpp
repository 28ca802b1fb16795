#pragma once

#include "ssd/triplet.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace ssd {

/// Location of the first negative mass found in a candidate Levy measure.
struct Violation {
    Vec direction;
    double radius = 0.0;
    std::int64_t index = 0;  // lattice index within its group
    double mass = 0.0;
    std::string what;
};

/// sum_{k>=0} C(k+m, m) C_mu(b^{-k} z). m = 0 is the forward map of the span-b mapping.
/// Throws DomainError when the (m+1)-th log-moment is infinite, ToleranceError when the
/// bound cannot be brought under tol.
Bounded<Complex> weighted_series_cumulant(const LevyTriplet& mu, double b, int m, const Vec& z, double tol);

/// Per-point piece sum_k C(k+m,m) (e^{i v_k} - 1 - i v_k / (1 + r^2)), v_k = u b^{-k}.
Complex weighted_point(double u, double r, double b, int m);
/// Envelope of weighted_point for |z| = znorm.
Envelope weighted_envelope(double znorm, double b, int m);

Bounded<Complex> phi_forward_cumulant(const LevyTriplet& rho, const SpanConfig& cfg, const Vec& z,
                                      double tol = 1e-12);

/// Exact image triplet. Lattice components must have base exactly b.
LevyTriplet phi_forward_triplet(const LevyTriplet& rho, const SpanConfig& cfg);

struct InverseResult {
    LevyTriplet rho;  // may carry negative mass when invalid
    bool valid = false;
    std::vector<std::string> reasons;
    std::optional<Violation> violation;
};

/// rho with A_rho = (1 - b^-2) A, nu_rho = nu - nu(b .), and the matching drift.
InverseResult phi_inverse(const LevyTriplet& mu, const SpanConfig& cfg);

struct FactorizationReport {
    std::vector<Vec> grid;
    std::vector<double> residuals;     // |C_mu(z) - C_mu(z/b) - C_rho(z)|
    std::vector<double> cf_residuals;  // |mu^(z) - mu^(z/b) rho^(z)|
    double max_residual = 0.0;
    double max_cf_residual = 0.0;
    double err_bound = 0.0;  // accumulated truncation bounds
};

FactorizationReport factorization_check(const LevyTriplet& mu, const LevyTriplet& rho, const SpanConfig& cfg,
                                        const std::vector<Vec>& grid, double tol = 1e-12);

/// Removes negative atoms (lattice groups are kept as they are).
LevyTriplet clip_negative_atoms(const LevyTriplet& t);

struct MembershipCertificate {
    std::string kind;
    double b = 2.0;
    int m = 0;
    std::vector<bool> levels;          // verdict per level 0..m
    std::vector<LevyTriplet> factors;  // witnessing factors rho^(1), rho^(2), ...
    std::optional<Violation> violation;
    int violation_level = -1;
    double residual = 0.0;          // factorization residual with the exact (signed) factor
    double clipped_residual = -1.0;  // residual with negative atoms removed (-1: not computed)
    double tol = 0.0;
    std::vector<std::string> notes;

    bool verdict() const {
        return !levels.empty() && std::all_of(levels.begin(), levels.end(), [](bool v) { return v; });
    }
};

MembershipCertificate is_semi_selfdecomposable(const LevyTriplet& mu, const SpanConfig& cfg,
                                               const std::vector<Vec>& grid, double tol = 1e-8);

struct InjectivityReport {
    double forward_gap = 0.0;  // max |C_Phi(rho1) - C_Phi(rho2)|
    double input_gap = 0.0;    // max |C_rho1 - C_rho2|
};

InjectivityReport injectivity_probe(const LevyTriplet& rho1, const LevyTriplet& rho2, const SpanConfig& cfg,
                                    const std::vector<Vec>& grid, double tol = 1e-12);

/// int_0^inf C_mu0(e^{-t} z) dt, the classical selfdecomposable map.
Bounded<Complex> classic_L_map_cumulant(const LevyTriplet& mu0, const Vec& z, double tol = 1e-9);

/// nu_b density (k(r) - k(br)) / r per direction.
LevyMeasure k_function_to_nu_b(const KFunction& k, const SpanConfig& cfg);

/// g(t) = b^{t/log b - [t/log b]}.
double period_function(const SpanConfig& cfg, double t);

}  // namespace ssd
