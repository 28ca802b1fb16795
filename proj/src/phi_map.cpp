#include "ssd/phi_map.hpp"
#include "ssd/skeleton.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <sstream>

namespace ssd {

namespace {

constexpr double kPointEps = 1e-17;
constexpr int kMaxPointTerms = 200000;

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

double binom_d(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// weighted series

Complex weighted_point(double u, double r, double b, int m) {
    if (u == 0.0) return {0.0, 0.0};
    const double binv = 1.0 / b;
    const double W1 = std::pow(1.0 - binv, -(m + 1));
    long double w = 1.0L;  // C(k+m, m)
    double v = u;
    int k = 0;
    auto advance = [&] {
        w *= static_cast<long double>(k + m + 1) / static_cast<long double>(k + 1);
        v *= binv;
        ++k;
    };

    // big phases first: e^{i v} - 1 summed as is
    Complex big(0.0, 0.0);
    const bool has_big = std::abs(u) > 1.0;
    while (std::abs(v) > 1.0) {
        big += static_cast<double>(w) * lk::expm1_i(v);
        advance();
    }
    // small phases: sum w (e^{iv} - 1 - iv), plus sum w v when the linear part is kept
    Complex gs(0.0, 0.0);
    long double vs = 0.0L;
    const double lead = has_big ? 0.0 : std::abs(u) * lk::r2_ratio(r) * W1;
    for (int guard = 0; guard < kMaxPointTerms; ++guard) {
        const double theta1 = (k + m + 1.0) / ((k + 1.0) * b);
        const double theta2 = theta1 * binv;
        if (theta1 < 1.0) {
            const double scale = std::abs(big) + std::abs(gs) + std::abs(static_cast<double>(vs)) + lead + 1e-300;
            const double wd = static_cast<double>(w);
            const double rg = wd * v * v * 0.5 / (1.0 - theta2);
            const double rv = has_big ? wd * std::abs(v) / (1.0 - theta1) : 0.0;
            if (rg <= kPointEps * scale && rv <= kPointEps * scale) break;
        }
        gs += static_cast<double>(w) * lk::expm1_i_minus(v);
        if (has_big) vs += w * static_cast<long double>(v);
        advance();
    }
    if (has_big)
        return big + gs + Complex(0.0, static_cast<double>(vs) - u * lk::centering(r) * W1);
    return gs + Complex(0.0, u * lk::r2_ratio(r) * W1);
}

Envelope weighted_envelope(double zn, double b, int m) {
    const double lb = std::log(b);
    const double W1 = std::pow(1.0 - 1.0 / b, -(m + 1));
    const double W2 = std::pow(1.0 - 1.0 / (b * b), -(m + 1));
    Envelope e;
    e.s2 = 0.5 * zn * zn * W2;
    e.s3 = zn * W1;
    // 2 X^{m+1}/(m+1)! + 1.5 W1 X^m/m! + |z| W1/2 with X = a0 + a1 log r
    const double a0 = 1.0 + m + std::max(0.0, std::log(zn)) / lb;
    const double a1 = 1.0 / lb;
    e.large.assign(m + 2, 0.0);
    auto add_power = [&](int n, double c) {
        for (int i = 0; i <= n; ++i) e.large[i] += c * binom_d(n, i) * std::pow(a0, n - i) * std::pow(a1, i);
    };
    add_power(m + 1, 2.0 / factorial(m + 1));
    add_power(m, 1.5 * W1 / factorial(m));
    e.large[0] += 0.5 * zn * W1;
    return e;
}

Bounded<Complex> weighted_series_cumulant(const LevyTriplet& mu, double b, int m, const Vec& z, double tol) {
    if (m < 0) throw InvalidArgument("m must be >= 0");
    if (!(b > 1.0 + Tolerances::span_margin)) throw InvalidArgument("span b must be > 1");
    if (z.size() != mu.dim()) throw InvalidArgument("z has wrong dimension");
    if (!mu.nu.empty() && std::isinf(log_moment(mu.nu, m + 1))) {
        std::ostringstream os;
        os << "log-moment of order " << m + 1 << " is infinite";
        throw DomainError(os.str());
    }
    if (z.isZero(0.0)) return {Complex(0.0, 0.0), 0.0};
    const double W1 = std::pow(1.0 - 1.0 / b, -(m + 1));
    const double W2 = std::pow(1.0 - 1.0 / (b * b), -(m + 1));
    const Complex base(-0.5 * z.dot(mu.A * z) * W2, mu.gamma.dot(z) * W1);
    if (mu.nu.empty()) return {base, 0.0};
    auto f = [&](const Vec& x, double r) { return weighted_point(z.dot(x), r, b, m); };
    auto s = sum_over_measure(mu.nu, f, weighted_envelope(z.norm(), b, m), tol, Complex(0.0, 0.0));
    if (s.err > tol) throw ToleranceError("series tail bound above tolerance", s.err);
    return {base + s.value, s.err};
}

Bounded<Complex> phi_forward_cumulant(const LevyTriplet& rho, const SpanConfig& cfg, const Vec& z, double tol) {
    return weighted_series_cumulant(rho, cfg.b, 0, z, tol);
}

// ---------------------------------------------------------------------------
// triplet level

namespace {

// sum_j b^{-j} (1/(1 + b^{-2j} r^2) - 1/(1 + r^2))
double forward_drift_factor(double r, double b) {
    const double binv = 1.0 / b;
    const double c = lk::centering(r);
    const double rr = lk::r2_ratio(r);
    double acc = 0.0;
    double p = 1.0;
    double y = r;
    for (int j = 1; j < kMaxPointTerms; ++j) {
        p *= binv;
        y *= binv;
        const double rem = p * rr / (1.0 - binv);
        if (rem <= kPointEps * acc && j > 1) break;
        acc += p * (lk::centering(y) - c);
    }
    return acc;
}

Envelope forward_drift_envelope(double b) {
    Envelope e;
    e.s3 = b / (b - 1.0);
    e.large = {2.0 * b / (b - 1.0)};
    return e;
}

Envelope inverse_drift_envelope(double b) {
    Envelope e;
    e.s3 = (b * b - 1.0) / (b * b * b);
    e.large = {0.5};
    return e;
}

constexpr double kDriftTol = 1e-14;

}  // namespace

LevyTriplet phi_forward_triplet(const LevyTriplet& rho, const SpanConfig& cfg) {
    const double b = cfg.b;
    if (!rho.nu.exact()) throw Unsupported("radial densities: use phi_forward_cumulant");
    if (!rho.nu.empty() && std::isinf(log_moment(rho.nu, 1))) throw DomainError("log-moment is infinite");
    LevyTriplet out = LevyTriplet::zero(rho.dim());
    out.A = rho.A / (1.0 - 1.0 / (b * b));
    out.gamma = rho.gamma * (b / (b - 1.0));
    if (rho.nu.empty()) return out;

    auto g = [&](const Vec& x, double r) -> Vec { return x * forward_drift_factor(r, b); };
    auto drift = sum_over_measure(rho.nu, g, forward_drift_envelope(b), kDriftTol, Vec(Vec::Zero(rho.dim())));
    out.gamma += drift.value;

    auto sk = Skeleton::from_measure(rho.nu, b);
    for (auto& grp : sk.groups) {
        if (std::abs(grp.base - b) > 1e-12 * b)
            throw Unsupported("forward triplet needs lattice base equal to the span");
        grp.mass = grp.mass.upper_tail_sum();
    }
    out.nu = sk.to_measure();
    return out;
}

InverseResult phi_inverse(const LevyTriplet& mu, const SpanConfig& cfg) {
    const double b = cfg.b;
    if (!mu.nu.exact()) throw Unsupported("radial densities have no exact inverse");
    InverseResult res;
    res.rho = LevyTriplet::zero(mu.dim());
    res.rho.A = (1.0 - 1.0 / (b * b)) * mu.A;
    res.rho.gamma = (1.0 - 1.0 / b) * mu.gamma;
    if (!mu.nu.empty()) {
        auto h = [&](const Vec& x, double r) -> Vec {
            return (x / b) * (lk::centering(r / b) - lk::centering(r));
        };
        auto drift = sum_over_measure(mu.nu, h, inverse_drift_envelope(b), kDriftTol, Vec(Vec::Zero(mu.dim())));
        res.rho.gamma -= drift.value;

        auto sk = Skeleton::from_measure(mu.nu, b);
        for (auto& grp : sk.groups) {
            const auto s = grp.step_for(b);
            if (!s) throw Unsupported("span is not an integer power of a lattice base");
            grp.mass = grp.mass - grp.mass.shifted(*s);
            if (res.violation) continue;
            const auto sign = grp.mass.check_nonnegative();
            if (!sign.nonnegative) {
                Violation v;
                v.direction = grp.direction;
                v.index = *sign.first_negative;
                v.radius = is_neg_inf(v.index) ? 0.0 : grp.radius(v.index);
                v.mass = sign.value_at_violation;
                v.what = "negative mass in nu - nu(b.)";
                res.violation = v;
            }
        }
        res.rho.nu = sk.to_measure();
    }
    const auto rep = validate(res.rho);
    res.reasons = rep.violations;
    res.valid = rep.ok && !res.violation;
    if (res.violation && rep.ok) res.reasons.push_back(res.violation->what);
    return res;
}

FactorizationReport factorization_check(const LevyTriplet& mu, const LevyTriplet& rho, const SpanConfig& cfg,
                                        const std::vector<Vec>& grid, double tol) {
    if (grid.empty()) throw InvalidArgument("grid is empty");
    FactorizationReport rep;
    rep.grid = grid;
    for (const auto& z : grid) {
        const auto a = cumulant(mu, z, tol);
        const auto c = cumulant(mu, Vec(z / cfg.b), tol);
        const auto r = cumulant(rho, z, tol);
        const double res = std::abs(a.value - c.value - r.value);
        const double cf = std::abs(std::exp(a.value) - std::exp(c.value + r.value));
        rep.residuals.push_back(res);
        rep.cf_residuals.push_back(cf);
        rep.max_residual = std::max(rep.max_residual, res);
        rep.max_cf_residual = std::max(rep.max_cf_residual, cf);
        rep.err_bound = std::max(rep.err_bound, a.err + c.err + r.err);
    }
    return rep;
}

LevyTriplet clip_negative_atoms(const LevyTriplet& t) {
    LevyTriplet out = t;
    std::erase_if(out.nu.atoms, [](const Atom& a) { return a.w < 0.0; });
    return out;
}

MembershipCertificate is_semi_selfdecomposable(const LevyTriplet& mu, const SpanConfig& cfg,
                                               const std::vector<Vec>& grid, double tol) {
    MembershipCertificate cert;
    cert.kind = "L(b)";
    cert.b = cfg.b;
    cert.m = 0;
    cert.tol = tol;
    const auto inv = phi_inverse(mu, cfg);
    cert.factors.push_back(inv.rho);
    cert.violation = inv.violation;
    if (inv.violation) cert.violation_level = 0;
    cert.notes = inv.reasons;
    const double ctol = std::min(1e-12, 0.01 * tol);
    cert.residual = factorization_check(mu, inv.rho, cfg, grid, ctol).max_residual;
    const auto clipped = clip_negative_atoms(inv.rho);
    if (clipped.nu.atoms.size() != inv.rho.nu.atoms.size())
        cert.clipped_residual = factorization_check(mu, clipped, cfg, grid, ctol).max_residual;
    cert.levels.push_back(inv.valid && cert.residual < tol);
    return cert;
}

InjectivityReport injectivity_probe(const LevyTriplet& rho1, const LevyTriplet& rho2, const SpanConfig& cfg,
                                    const std::vector<Vec>& grid, double tol) {
    InjectivityReport rep;
    for (const auto& z : grid) {
        const auto f1 = phi_forward_cumulant(rho1, cfg, z, tol);
        const auto f2 = phi_forward_cumulant(rho2, cfg, z, tol);
        rep.forward_gap = std::max(rep.forward_gap, std::abs(f1.value - f2.value));
        const auto c1 = cumulant(rho1, z, tol);
        const auto c2 = cumulant(rho2, z, tol);
        rep.input_gap = std::max(rep.input_gap, std::abs(c1.value - c2.value));
    }
    return rep;
}

Bounded<Complex> classic_L_map_cumulant(const LevyTriplet& mu0, const Vec& z, double tol) {
    if (!mu0.nu.empty() && std::isinf(log_moment(mu0.nu, 1))) throw DomainError("log-moment is infinite");
    if (z.isZero(0.0)) return {Complex(0.0, 0.0), 0.0};
    const double inner = 0.01 * tol;
    auto f = [&](double t) { return cumulant(mu0, Vec(std::exp(-t) * z), inner).value; };
    // integrate over unit t-intervals until the integrand is negligible; C(e^{-t} z) decays
    // at least like e^{-t} once e^{-t}|z| is small, so the remainder is about |C(e^{-T} z)|
    Complex acc(0.0, 0.0);
    double err = 0.0;
    double T = 0.0;
    for (int step = 0; step < 200; ++step) {
        double qerr = 0.0;
        acc += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, T, T + 1.0, 15, 1e-12, &qerr);
        err += qerr;
        T += 1.0;
        const double tail = std::abs(f(T));
        if (tail < 0.1 * tol && std::exp(-T) * z.norm() < 1e-3) {
            err += tail;
            if (err > tol) throw ToleranceError("classical L-map quadrature above tolerance", err);
            return {acc, err};
        }
    }
    throw ToleranceError("classical L-map integral did not settle", err);
}

LevyMeasure k_function_to_nu_b(const KFunction& k, const SpanConfig& cfg) {
    return k_difference_measure(k, cfg.b);
}

double period_function(const SpanConfig& cfg, double t) {
    if (!(t >= 0.0)) throw InvalidArgument("period_function needs t >= 0");
    const double x = t / std::log(cfg.b);
    return std::pow(cfg.b, x - std::floor(x));
}

}  // namespace ssd
