#include "ssd/triplet.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace ssd {

LevyTriplet LevyTriplet::zero(int d) {
    if (d < 1) throw InvalidArgument("dimension must be >= 1");
    return LevyTriplet{Mat::Zero(d, d), LevyMeasure{}, Vec::Zero(d)};
}

LevyTriplet LevyTriplet::gaussian(const Mat& A) {
    auto t = zero(static_cast<int>(A.rows()));
    t.A = A;
    return t;
}

LevyTriplet LevyTriplet::compound_poisson(const std::vector<Atom>& atoms) {
    if (atoms.empty()) throw InvalidArgument("compound Poisson needs at least one atom");
    auto t = zero(static_cast<int>(atoms.front().x.size()));
    for (const auto& a : atoms) {
        t.nu.add_atom(a.x, a.w);
        const double r = a.x.norm();
        t.gamma += a.w * a.x * lk::centering(r);
    }
    return t;
}

namespace lk {

double sin_minus(double u) {
    if (std::abs(u) < 0.25) {
        const double u2 = u * u;
        return -u * u2 / 6.0 *
               (1.0 - u2 / 20.0 * (1.0 - u2 / 42.0 * (1.0 - u2 / 72.0 * (1.0 - u2 / 110.0))));
    }
    return std::sin(u) - u;
}

Complex expm1_i(double u) {
    const double h = std::sin(0.5 * u);
    return {-2.0 * h * h, std::sin(u)};
}

Complex expm1_i_minus(double u) {
    const double h = std::sin(0.5 * u);
    return {-2.0 * h * h, sin_minus(u)};
}

double r2_ratio(double r) { return r < 1.0 ? r * r / (1.0 + r * r) : 1.0 / (1.0 + 1.0 / (r * r)); }

double centering(double r) { return r < 1.0 ? 1.0 / (1.0 + r * r) : (1.0 / (r * r)) / (1.0 + 1.0 / (r * r)); }

}  // namespace lk

bool same_direction(const Vec& a, const Vec& b) {
    return a.size() == b.size() && (a - b).norm() <= 1e-12;
}

// ---------------------------------------------------------------------------

double small_jump_integral(const LevyMeasure& nu) {
    double s = 0.0;
    for (const auto& a : nu.atoms) s += std::abs(a.w) * std::min(a.x.squaredNorm(), 1.0);
    for (const auto& L : nu.lattices) {
        const std::int64_t kin = L.last_inside_unit();
        const double lo = L.mass.abs_moment(kIndexMin, kin, L.base * L.base, 1.0, 0.0, 0);
        const double hi = L.mass.abs_moment(kin + 1, kIndexMax, 1.0, 1.0, 0.0, 0);
        if (std::isinf(lo) || std::isinf(hi)) return kInf;
        s += L.anchor * L.anchor * lo + hi;
    }
    for (const auto& R : nu.radials) {
        const double t0 = R.small_tail(1.0, 2);
        const double t1 = R.large_tail(1.0, 0);
        if (!std::isfinite(t0) || !std::isfinite(t1)) return kInf;
        // tail bounds double as finite upper estimates here
        s += t0 + t1;
    }
    return s;
}

ValidationReport validate(const LevyTriplet& t) {
    ValidationReport rep;
    const int d = t.dim();
    if (d < 1) {
        rep.fail("dimension must be >= 1");
        return rep;
    }
    if (t.A.rows() != d || t.A.cols() != d) {
        rep.fail("Gaussian matrix has wrong shape");
        return rep;
    }
    if (!t.A.allFinite() || !t.gamma.allFinite()) rep.fail("non-finite entries");
    const double scale = std::max(1.0, t.A.norm());
    if ((t.A - t.A.transpose()).norm() > 1e-12 * scale) rep.fail("Gaussian matrix not symmetric");
    if (t.A.allFinite()) {
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (t.A + t.A.transpose()), Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -Tolerances::psd * scale)
            rep.fail("Gaussian matrix not nonnegative-definite");
    }
    for (const auto& a : t.nu.atoms) {
        if (a.x.size() != d) rep.fail("atom has wrong dimension");
        else if (a.x.norm() == 0.0) rep.fail("mass at origin");
        if (a.w < 0.0) rep.fail("negative atom mass");
    }
    for (std::size_t i = 0; i < t.nu.lattices.size(); ++i) {
        const auto& L = t.nu.lattices[i];
        if (L.direction.size() != d) {
            rep.fail("lattice direction has wrong dimension");
            continue;
        }
        const auto sign = L.mass.check_nonnegative();
        if (!sign.nonnegative) {
            std::ostringstream os;
            os << "negative lattice mass at index " << *sign.first_negative;
            rep.fail(os.str());
            if (!rep.first_negative) rep.first_negative = {{i, *sign.first_negative}};
        }
        if (!L.mass.lower_tail_converges(L.base * L.base) || !L.mass.upper_tail_converges())
            rep.fail("integral of |x|^2 ^ 1 diverges");
    }
    for (const auto& R : t.nu.radials) {
        if (R.direction.size() != d) rep.fail("radial direction has wrong dimension");
        if (!std::isfinite(R.small_tail(1.0, 2)) || !std::isfinite(R.large_tail(1.0, 0)))
            rep.fail("integral of |x|^2 ^ 1 diverges");
    }
    return rep;
}

double log_moment(const LevyMeasure& nu, int p) {
    if (p < 1) throw InvalidArgument("log_moment needs p >= 1");
    double s = 0.0;
    for (const auto& a : nu.atoms) {
        const double r = a.x.norm();
        if (r > 1.0) s += std::abs(a.w) * std::pow(std::log(r), p);
    }
    for (const auto& L : nu.lattices) {
        const double v = L.mass.abs_moment(L.last_inside_unit() + 1, kIndexMax, 1.0, std::log(L.anchor),
                                           std::log(L.base), p);
        if (std::isinf(v)) return kInf;
        s += v;
    }
    for (const auto& R : nu.radials) {
        auto [lo, hi] = R.support();
        if (lo >= hi || hi <= 1.0) continue;
        lo = std::max(lo, 1.0);
        if (std::isinf(hi)) {
            if (std::isinf(R.large_tail(1.0, p))) return kInf;
            hi = 2.0;
            while (R.large_tail(hi, p) > 1e-14 && hi < 1e300) hi *= 2.0;
        }
        auto g = [&](double t) { return std::pow(t, p) * R.h(std::exp(t)) * std::exp(t); };
        double err = 0.0;
        s += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, std::log(lo), std::log(hi), 15,
                                                                          1e-10, &err);
    }
    return s;
}

Envelope cumulant_envelope(double zn) {
    Envelope e;
    e.s2 = 0.5 * zn * zn;
    e.s3 = zn;
    e.large = {2.0 + 0.5 * zn};
    return e;
}

Bounded<Complex> cumulant(const LevyTriplet& t, const Vec& z, double tol) {
    if (z.size() != t.dim()) throw InvalidArgument("z has wrong dimension");
    if (z.isZero(0.0)) return {Complex(0.0, 0.0), 0.0};
    const Complex gauss(-0.5 * z.dot(t.A * z), t.gamma.dot(z));
    if (t.nu.empty()) return {gauss, 0.0};
    auto f = [&](const Vec& x, double r) {
        const double u = z.dot(x);
        // e^{iu} - 1 - iu/(1+r^2) = (e^{iu} - 1 - iu) + iu r^2/(1+r^2)
        Complex v = r < 1.0 ? lk::expm1_i_minus(u) + Complex(0.0, u * lk::r2_ratio(r))
                            : lk::expm1_i(u) - Complex(0.0, u * lk::centering(r));
        return v;
    };
    auto s = sum_over_measure(t.nu, f, cumulant_envelope(z.norm()), tol, Complex(0.0, 0.0));
    return {gauss + s.value, s.err};
}

LevyTriplet scaled_law(const LevyTriplet& t, double a) {
    if (!(a != 0.0) || !std::isfinite(a)) throw InvalidArgument("scale factor must be finite and nonzero");
    if (!t.nu.exact()) throw Unsupported("scaling radial densities is not supported");
    LevyTriplet out = LevyTriplet::zero(t.dim());
    out.A = a * a * t.A;
    out.gamma = a * t.gamma;
    if (t.nu.empty()) return out;
    // a x (1/(1 + a^2 |x|^2) - 1/(1 + |x|^2))
    const double aa = std::abs(a);
    auto g = [&](const Vec& x, double r) -> Vec { return a * x * (lk::centering(aa * r) - lk::centering(r)); };
    Envelope env;
    env.s3 = aa * std::abs(a * a - 1.0);
    env.large = {aa + 1.0 / aa};
    out.gamma += sum_over_measure(t.nu, g, env, 1e-14, Vec(Vec::Zero(t.dim()))).value;
    for (const auto& at : t.nu.atoms) out.nu.add_atom(a * at.x, at.w);
    for (const auto& L : t.nu.lattices)
        out.nu.add_lattice(a > 0 ? L.direction : Vec(-L.direction), L.base, aa * L.anchor, L.mass);
    return out;
}

LevyTriplet convolution_power(const LevyTriplet& t, double s) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("convolution power must be > 0");
    LevyTriplet out = t;
    out.A *= s;
    out.gamma *= s;
    for (auto& at : out.nu.atoms) at.w *= s;
    for (auto& L : out.nu.lattices) L.mass = L.mass.scaled(s);
    for (auto& R : out.nu.radials) {
        if (auto* ts = std::get_if<TemperedStable>(&R.family)) ts->w *= s;
        else std::get<KDifference>(R.family).weight *= s;
    }
    return out;
}

std::vector<PolarComponent> polar_atoms(const LevyMeasure& nu) {
    if (!nu.radials.empty()) throw Unsupported("polar_atoms does not handle radial densities");
    std::vector<PolarComponent> out;
    auto slot = [&](const Vec& xi) -> PolarComponent& {
        for (auto& c : out)
            if (same_direction(c.direction, xi)) return c;
        out.push_back(PolarComponent{xi, 1.0, {}, {}});
        return out.back();
    };
    for (const auto& a : nu.atoms) {
        const double r = a.x.norm();
        if (r == 0.0) throw InvalidArgument("mass at origin");
        slot(a.x / r).radial_atoms.emplace_back(r, a.w);
    }
    for (const auto& L : nu.lattices) slot(L.direction).radial_lattices.push_back(L);
    return out;
}

}  // namespace ssd
