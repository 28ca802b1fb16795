#pragma once

// Summation of w * f(x) over a Levy measure with rigorous truncation bounds.
//
// f is described to the engine by an envelope: near the origin |f(x)| <= s2 r^2 + s3 r^3,
// away from it |f(x)| <= sum_i large[i] (log r)^i. Lattice tails are then bounded in
// closed form through LatticeMass::abs_moment, radial densities through their declared
// tail bounds, and only the remaining finite window is evaluated explicitly.

#include "ssd/levy_measure.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace ssd {

struct Envelope {
    double s2 = 0.0;
    double s3 = 0.0;
    std::vector<double> large{0.0};
};

/// Restrict the sum to radii in [r_min, r_max).
struct RadiusWindow {
    double r_min = 0.0;
    double r_max = kInf;
    bool trivial() const { return r_min <= 0.0 && std::isinf(r_max); }
};

struct SumLimits {
    std::int64_t max_side_terms = 1000000;
    double min_radius = 1e-290;
    double max_radius = 1e290;
    double quad_rel = 1e-10;
};

namespace detail {

inline std::int64_t first_at_least(const ScaleLattice& L, double r) {
    auto k = static_cast<std::int64_t>(std::ceil(std::log(r / L.anchor) / std::log(L.base)));
    while (L.radius(k - 1) >= r) --k;
    while (L.radius(k) < r) ++k;
    return k;
}

inline std::int64_t last_below(const ScaleLattice& L, double r) {
    auto k = static_cast<std::int64_t>(std::floor(std::log(r / L.anchor) / std::log(L.base)));
    while (L.radius(k) >= r) --k;
    while (L.radius(k + 1) < r) ++k;
    return k;
}

// Index window [Klo, Khi] to evaluate explicitly plus the bound on everything outside.
struct LatticePlan {
    std::int64_t lo = 1;
    std::int64_t hi = 0;
    double err = 0.0;
};

inline LatticePlan plan_lattice(const ScaleLattice& L, const Envelope& env, double tol_side,
                                const RadiusWindow& win, const SumLimits& lim) {
    const LatticeMass& m = L.mass;
    const double la = std::log(L.anchor);
    const double lb = std::log(L.base);
    const double b2 = L.base * L.base;
    const double a2 = L.anchor * L.anchor;
    const std::int64_t kin = L.last_inside_unit();

    std::int64_t A = m.lowest();
    std::int64_t B = m.highest();
    if (win.r_min > 0.0) A = std::max(A, first_at_least(L, win.r_min));
    if (std::isfinite(win.r_max)) B = std::min(B, last_below(L, win.r_max));
    LatticePlan plan;
    if (A > B) return plan;

    // bound on the small side below K (indices in [A, min(K - 1, kin)])
    auto small = [&](std::int64_t K) {
        const std::int64_t hi = std::min(K - 1, kin);
        if (A > hi) return 0.0;
        double s = 0.0;
        if (env.s2 != 0.0) s += env.s2 * a2 * m.abs_moment(A, hi, b2, 1.0, 0.0, 0);
        if (env.s3 != 0.0) s += env.s3 * a2 * L.anchor * m.abs_moment(A, hi, b2 * L.base, 1.0, 0.0, 0);
        return s;
    };
    // bound on the large side above K (indices in [max(K + 1, kin + 1), B])
    auto large = [&](std::int64_t K) {
        const std::int64_t lo = std::max(K + 1, kin + 1);
        if (lo > B) return 0.0;
        double s = 0.0;
        for (std::size_t i = 0; i < env.large.size(); ++i)
            if (env.large[i] != 0.0) s += env.large[i] * m.abs_moment(lo, B, 1.0, la, lb, static_cast<int>(i));
        return s;
    };

    const std::int64_t k_floor = first_at_least(L, lim.min_radius);
    const std::int64_t k_ceil = last_below(L, lim.max_radius);

    // lower end: largest K <= s0 with small(K) <= tol_side
    std::int64_t s0 = std::min(kin + 1, B + 1);
    std::int64_t Klo;
    if (A >= s0 || small(s0) <= tol_side) {
        Klo = std::max(A, std::min(s0, B));
    } else {
        std::int64_t bad = s0, good = s0;
        std::int64_t d = 1;
        bool found = false;
        while (d <= lim.max_side_terms) {
            const std::int64_t K = s0 - d;
            if (K <= A) {
                good = A;
                found = true;
                break;
            }
            if (K < k_floor) break;
            if (small(K) <= tol_side) {
                good = K;
                found = true;
                break;
            }
            bad = K;
            d *= 2;
        }
        if (found) {
            while (bad - good > 1) {
                const std::int64_t mid = good + (bad - good) / 2;
                if (small(mid) <= tol_side) good = mid; else bad = mid;
            }
            Klo = good;
        } else {
            Klo = std::max({A, k_floor, s0 - lim.max_side_terms});
        }
    }
    // upper end: smallest K >= s1 with large(K) <= tol_side
    std::int64_t s1 = std::max(kin, A - 1);
    std::int64_t Khi;
    if (B <= s1 || large(s1) <= tol_side) {
        Khi = std::min(B, std::max(s1, A));
    } else {
        std::int64_t bad = s1, good = s1;
        std::int64_t d = 1;
        bool found = false;
        while (d <= lim.max_side_terms) {
            const std::int64_t K = s1 + d;
            if (K >= B) {
                good = B;
                found = true;
                break;
            }
            if (K > k_ceil) break;
            if (large(K) <= tol_side) {
                good = K;
                found = true;
                break;
            }
            bad = K;
            d *= 2;
        }
        if (found) {
            while (good - bad > 1) {
                const std::int64_t mid = bad + (good - bad) / 2;
                if (large(mid) <= tol_side) good = mid; else bad = mid;
            }
            Khi = good;
        } else {
            Khi = std::min({B, k_ceil, s1 + lim.max_side_terms});
        }
    }
    plan.lo = Klo;
    plan.hi = Khi;
    plan.err = small(Klo) + large(Khi);
    return plan;
}

inline std::pair<double, double> plan_radial(const RadialDensity& R, const Envelope& env, double tol_side) {
    auto [lo, hi] = R.support();
    if (lo >= hi) return {1.0, 1.0};
    if (lo <= 0.0) {
        lo = 0.5;
        for (int j = 0; j < 2000; ++j) {
            const double t = env.s2 * R.small_tail(lo, 2) + env.s3 * R.small_tail(lo, 3);
            if (t <= tol_side) break;
            lo *= 0.5;
        }
        lo = std::min(lo, hi);
    }
    if (std::isinf(hi)) {
        hi = std::max(2.0, lo);
        for (int j = 0; j < 2000; ++j) {
            double t = 0.0;
            for (std::size_t i = 0; i < env.large.size(); ++i)
                if (env.large[i] != 0.0) t += env.large[i] * R.large_tail(hi, static_cast<int>(i));
            if (std::isinf(t)) throw DomainError("radial density tail integral diverges");
            if (t <= tol_side) break;
            hi *= 1.5;
        }
    }
    return {lo, hi};
}

inline double radial_tail_err(const RadialDensity& R, const Envelope& env, double lo, double hi) {
    double e = 0.0;
    const auto [slo, shi] = R.support();
    if (lo > slo) e += env.s2 * R.small_tail(std::min(lo, 1.0), 2) + env.s3 * R.small_tail(std::min(lo, 1.0), 3);
    if (hi < shi)
        for (std::size_t i = 0; i < env.large.size(); ++i)
            if (env.large[i] != 0.0) e += env.large[i] * R.large_tail(std::max(hi, 1.0), static_cast<int>(i));
    return e;
}

}  // namespace detail

/// sum over atoms, lattice points and radial densities of w * f(x, |x|).
///
/// T is the value type (double, Complex or Vec); radial densities require a scalar T.
template <class T, class F>
Bounded<T> sum_over_measure(const LevyMeasure& nu, F&& f, const Envelope& env, double tol, T zero,
                            const RadiusWindow& win = {}, const SumLimits& lim = {}) {
    T acc = zero;
    double err = 0.0;
    const std::size_t parts = 2 * (nu.lattices.size() + nu.radials.size()) + 1;
    const double tol_side = tol / static_cast<double>(parts);

    for (const auto& a : nu.atoms) {
        const double r = a.x.norm();
        if (r < win.r_min || r >= win.r_max) continue;
        acc += a.w * f(a.x, r);
    }
    for (const auto& L : nu.lattices) {
        const auto plan = detail::plan_lattice(L, env, tol_side, win, lim);
        err += plan.err;
        for (std::int64_t k = plan.lo; k <= plan.hi; ++k) {
            const double w = L.mass.at(k);
            if (w == 0.0) continue;
            const double r = L.radius(k);
            acc += w * f(Vec(r * L.direction), r);
        }
    }
    if (!nu.radials.empty()) {
        if constexpr (std::is_same_v<T, Vec>) {
            throw Unsupported("vector-valued sums over radial densities are not supported");
        } else {
            if (!win.trivial()) throw Unsupported("radius windows over radial densities are not supported");
            using boost::math::quadrature::gauss_kronrod;
            for (const auto& R : nu.radials) {
                const auto [lo, hi] = detail::plan_radial(R, env, tol_side);
                if (!(hi > lo)) continue;
                err += detail::radial_tail_err(R, env, lo, hi);
                std::vector<double> cuts{std::log(lo), std::log(hi)};
                for (double p : R.breakpoints())
                    if (p > lo && p < hi) cuts.push_back(std::log(p));
                if (lo < 1.0 && hi > 1.0) cuts.push_back(0.0);
                std::sort(cuts.begin(), cuts.end());
                auto g = [&](double t) -> T {
                    const double s = std::exp(t);
                    const double hs = R.h(s);
                    if (hs == 0.0) return zero;
                    return f(Vec(s * R.direction), s) * (hs * s);
                };
                for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                    if (!(cuts[i + 1] > cuts[i])) continue;
                    double qerr = 0.0, l1 = 0.0;
                    const T v = gauss_kronrod<double, 61>::integrate(g, cuts[i], cuts[i + 1], 15,
                                                                     lim.quad_rel, &qerr, &l1);
                    if (qerr > std::max(tol_side, 1e-9 * l1))
                        throw ToleranceError("radial quadrature did not reach tolerance", qerr);
                    acc += v;
                    err += qerr;
                }
            }
        }
    }
    return {acc, err};
}

}  // namespace ssd
