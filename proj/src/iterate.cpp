#include "ssd/iterate.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <sstream>

namespace ssd {

IterConfig::IterConfig(double span, int level) : b(span), m(level) {
    SpanConfig check(span);
    (void)check;
    if (level < 0 || level > kMaxIterLevel) {
        std::ostringstream os;
        os << "level m must lie in [0, " << kMaxIterLevel << "]";
        throw InvalidArgument(os.str());
    }
}

std::uint64_t binomial(std::int64_t n, std::int64_t k) {
    if (n < 0 || k < 0) throw InvalidArgument("binomial needs n, k >= 0");
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        r = r * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
        if (r > std::numeric_limits<std::uint64_t>::max()) throw Unsupported("binomial overflows 64 bits");
    }
    return static_cast<std::uint64_t>(r);
}

std::uint64_t f_m_at(std::int64_t k, int m) {
    if (k < 0 || m < 0) throw InvalidArgument("f_m needs k, m >= 0");
    return binomial(k + m, m + 1);
}

double f_m(double u, int m) {
    if (!(u >= 0.0) || m < 0) throw InvalidArgument("f_m needs u >= 0 and m >= 0");
    const auto k = static_cast<std::int64_t>(std::floor(u));
    return static_cast<double>(f_m_at(k, m)) + (u - static_cast<double>(k)) * static_cast<double>(binomial(k + m, m));
}

double f_m_star(double t, int m) {
    if (!(t >= 0.0) || m < 0) throw InvalidArgument("f_m_star needs t >= 0 and m >= 0");
    // largest k with f_m(k) <= t
    std::int64_t lo = 0, hi = 1;
    while (static_cast<double>(f_m_at(hi, m)) <= t) {
        lo = hi;
        hi *= 2;
    }
    while (hi - lo > 1) {
        const auto mid = lo + (hi - lo) / 2;
        if (static_cast<double>(f_m_at(mid, m)) <= t) lo = mid;
        else hi = mid;
    }
    return static_cast<double>(lo) +
           (t - static_cast<double>(f_m_at(lo, m))) / static_cast<double>(binomial(lo + m, m));
}

bool binom_identity_check(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) throw InvalidArgument("binom_identity_check needs 0 <= k <= n");
    // int_0^{n-k+1} C(n - [t], k) dt is a sum over unit cells
    unsigned __int128 lhs = 0;
    for (std::int64_t j = 0; j <= n - k; ++j) lhs += binomial(n - j, k);
    return lhs == binomial(n + 1, k + 1);
}

Bounded<Complex> phi_iter_cumulant(const LevyTriplet& mu, const IterConfig& cfg, const Vec& z, double tol) {
    return weighted_series_cumulant(mu, cfg.b, cfg.m, z, tol);
}

MembershipCertificate is_Lm_member(const LevyTriplet& mu, const IterConfig& cfg, const std::vector<Vec>& grid,
                                   double tol) {
    if (!mu.nu.exact()) throw Unsupported("membership needs atoms and lattices only");
    MembershipCertificate cert;
    cert.kind = "L_m(b)";
    cert.b = cfg.b;
    cert.m = cfg.m;
    cert.tol = tol;
    const SpanConfig span(cfg.b);
    const double ctol = std::min(1e-12, 0.01 * tol);
    LevyTriplet cur = mu;
    bool ok = true;
    for (int level = 0; level <= cfg.m; ++level) {
        if (!ok) {
            cert.levels.push_back(false);
            continue;
        }
        const auto inv = phi_inverse(cur, span);
        cert.factors.push_back(inv.rho);
        const double res = factorization_check(cur, inv.rho, span, grid, ctol).max_residual;
        cert.residual = std::max(cert.residual, res);
        ok = inv.valid && res < tol;
        if (!ok) {
            cert.violation = inv.violation;
            cert.violation_level = level;
            for (const auto& r : inv.reasons) cert.notes.push_back("level " + std::to_string(level) + ": " + r);
            const auto clipped = clip_negative_atoms(inv.rho);
            if (clipped.nu.atoms.size() != inv.rho.nu.atoms.size())
                cert.clipped_residual = factorization_check(cur, clipped, span, grid, ctol).max_residual;
        }
        cert.levels.push_back(ok);
        cur = inv.rho;
    }
    return cert;
}

LevyTriplet semi_stable_triplet(const SemiStableSpec& spec) {
    SpanConfig check(spec.b);
    (void)check;
    if (!(spec.alpha > 0.0 && spec.alpha < 2.0)) throw InvalidArgument("alpha must lie in (0, 2)");
    if (!(spec.r0 > 0.0)) throw InvalidArgument("anchor radius must be > 0");
    if (spec.directions.empty()) throw InvalidArgument("at least one direction is needed");
    const int d = static_cast<int>(spec.directions.front().first.size());
    auto t = LevyTriplet::zero(d);
    const double q = std::pow(spec.b, -spec.alpha);
    for (const auto& [xi, w] : spec.directions) {
        if (xi.size() != d || !(xi.norm() > 0.0)) throw InvalidArgument("bad direction");
        if (!(w > 0.0)) throw InvalidArgument("direction weights must be > 0");
        t.nu.add_lattice(xi / xi.norm(), spec.b, spec.r0, LatticeMass::geometric(w, q));
    }
    if (spec.alpha == 1.0) return t;
    // gamma = b^alpha D / (b^alpha - b), D = sum_k m(k) x_k (c(r_k) - c(r_k / b))
    const double b = spec.b;
    auto g = [&](const Vec& x, double r) -> Vec { return x * (lk::centering(r) - lk::centering(r / b)); };
    Envelope env;
    env.s3 = 1.0;
    env.large = {1.0 + b * b};
    const auto D = sum_over_measure(t.nu, g, env, 1e-15, Vec(Vec::Zero(d)));
    const double ba = std::pow(b, spec.alpha);
    t.gamma = ba * D.value / (ba - b);
    return t;
}

SemiStableFit is_semi_stable(const LevyTriplet& mu, double b, const std::vector<Vec>& grid, double tol) {
    SpanConfig check(b);
    (void)check;
    if (grid.empty()) throw InvalidArgument("grid is empty");
    const int d = mu.dim();
    std::vector<Complex> cz, cbz;
    SemiStableFit fit;
    double best = 0.0;
    std::size_t iref = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        cz.push_back(cumulant(mu, grid[i]).value);
        cbz.push_back(cumulant(mu, Vec(b * grid[i])).value);
        if (std::abs(cz.back().real()) > best) {
            best = std::abs(cz.back().real());
            iref = i;
        }
    }
    if (best <= 1e-300) throw InvalidArgument("degenerate law: Re C vanishes on the grid");
    fit.z_ref = grid[iref];
    fit.a = cbz[iref].real() / cz[iref].real();
    // <c, z> = Im(a C(z) - C(bz)) in the least-squares sense
    Mat Z(static_cast<Eigen::Index>(grid.size()), d);
    Vec y(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Z.row(static_cast<Eigen::Index>(i)) = grid[i].transpose();
        y[static_cast<Eigen::Index>(i)] = (fit.a * cz[i] - cbz[i]).imag();
    }
    fit.c = Z.colPivHouseholderQr().solve(y);
    for (std::size_t i = 0; i < grid.size(); ++i)
        fit.residual = std::max(fit.residual, std::abs(fit.a * cz[i] - cbz[i] - Complex(0.0, fit.c.dot(grid[i]))));
    fit.verdict = fit.a > 1.0 && fit.residual < tol;
    return fit;
}

}  // namespace ssd
