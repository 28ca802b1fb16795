#pragma once

#include "ssd/phi_map.hpp"

#include <cstdint>
#include <vector>

namespace ssd {

inline constexpr int kMaxIterLevel = 8;

struct IterConfig {
    double b;
    int m;

    IterConfig(double span, int level);
};

/// Exact C(n, k) by multiplicative recurrence; throws Unsupported on 64-bit overflow.
std::uint64_t binomial(std::int64_t n, std::int64_t k);

/// f_m(u) = int_0^u C([v] + m, m) dv. f_m(k) = C(k + m, m + 1) at integers.
double f_m(double u, int m);
std::uint64_t f_m_at(std::int64_t k, int m);
/// Inverse of f_m.
double f_m_star(double t, int m);

/// sum_{j=0}^{n-k} C(n - j, k) == C(n + 1, k + 1), both sides in exact integers.
bool binom_identity_check(std::int64_t n, std::int64_t k);

/// sum_k C(k+m, m) C_mu(b^{-k} z): the cumulant of the (m+1)-fold iterated mapping.
Bounded<Complex> phi_iter_cumulant(const LevyTriplet& mu, const IterConfig& cfg, const Vec& z, double tol = 1e-12);

/// Iterated exact differencing; levels[j] says whether factors 1..j+1 are all valid.
MembershipCertificate is_Lm_member(const LevyTriplet& mu, const IterConfig& cfg, const std::vector<Vec>& grid,
                                   double tol = 1e-8);

struct SemiStableSpec {
    double b = 2.0;
    double alpha = 1.0;
    std::vector<std::pair<Vec, double>> directions;  // (xi, w)
    double r0 = 1.0;
};

/// Lattice nu with mass w b^{-alpha k} at r0 b^k xi. For alpha != 1 the drift makes the law
/// strictly semi-stable, C(bz) = b^alpha C(z); for alpha = 1 no drift does that and gamma = 0.
LevyTriplet semi_stable_triplet(const SemiStableSpec& spec);

struct SemiStableFit {
    double a = 0.0;
    Vec c;
    Vec z_ref;
    double residual = 0.0;  // max |a C(z) - C(bz) - i<c, z>|
    bool verdict = false;
};

SemiStableFit is_semi_stable(const LevyTriplet& mu, double b, const std::vector<Vec>& grid, double tol = 1e-8);

}  // namespace ssd
