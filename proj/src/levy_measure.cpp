#include "ssd/levy_measure.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>

namespace ssd {

namespace {

Vec unit(const Vec& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("direction must be a nonzero finite vector");
    return v / n;
}

// int_T^inf t^i e^{-a t} dt for a > 0, T >= 0
double gamma_tail(int i, double a, double T) {
    double sum = 0.0;
    double fact_ratio = 1.0;  // i! / j!
    for (int j = i; j >= 0; --j) {
        sum += fact_ratio * std::pow(T, j) / std::pow(a, i - j + 1);
        fact_ratio *= j;
    }
    return std::exp(-a * T) * sum;
}

// int_S^inf s^{c - 1} e^{-lambda s} ds, c > 0
double upper_gamma(double c, double lambda, double S) {
    return boost::math::tgamma(c, lambda * S) / std::pow(lambda, c);
}

}  // namespace

double ScaleLattice::radius(std::int64_t k) const {
    return anchor * std::pow(base, static_cast<double>(k));
}

std::int64_t ScaleLattice::last_inside_unit() const {
    auto k = static_cast<std::int64_t>(std::floor(-std::log(anchor) / std::log(base)));
    while (radius(k + 1) <= 1.0) ++k;
    while (radius(k) > 1.0) --k;
    return k;
}

// ---------------------------------------------------------------------------

KShape KShape::exp(double a, double lambda) {
    if (!(a >= 0.0) || !(lambda >= 0.0)) throw InvalidArgument("k-function exp needs a >= 0, lambda >= 0");
    KShape k;
    k.kind = Kind::Exp;
    k.a = a;
    k.lambda = lambda;
    return k;
}

KShape KShape::steps(std::vector<double> cuts, std::vector<double> values) {
    if (values.size() != cuts.size() + 1) throw InvalidArgument("k-function steps need |values| = |cuts| + 1");
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        if (!(cuts[i] > 0.0)) throw InvalidArgument("k-function cut points must be positive");
        if (i > 0 && !(cuts[i] > cuts[i - 1])) throw InvalidArgument("k-function cut points must increase");
    }
    KShape k;
    k.kind = Kind::Steps;
    k.cuts = std::move(cuts);
    k.values = std::move(values);
    return k;
}

KShape KShape::constant(double a) {
    if (!(a >= 0.0)) throw InvalidArgument("k-function constant must be >= 0");
    KShape k;
    k.kind = Kind::Constant;
    k.a = a;
    return k;
}

double KShape::operator()(double r) const {
    switch (kind) {
        case Kind::Exp:
            return a * std::exp(-lambda * r);
        case Kind::Constant:
            return a;
        case Kind::Steps: {
            const auto it = std::upper_bound(cuts.begin(), cuts.end(), r);
            return values[static_cast<std::size_t>(it - cuts.begin())];
        }
    }
    return 0.0;
}

bool KShape::nonincreasing() const {
    if (kind != Kind::Steps) return true;
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
        if (values[i + 1] > values[i]) return false;
    return values.back() >= 0.0;
}

// ---------------------------------------------------------------------------

double RadialDensity::h(double s) const {
    if (!(s > 0.0)) return 0.0;
    if (const auto* ts = std::get_if<TemperedStable>(&family))
        return ts->w * std::pow(s, -1.0 - ts->alpha) * std::exp(-ts->lambda * s);
    const auto& kd = std::get<KDifference>(family);
    return kd.weight * (kd.k(s) - kd.k(kd.b * s)) / s;
}

std::vector<double> RadialDensity::breakpoints() const {
    std::vector<double> out;
    if (const auto* kd = std::get_if<KDifference>(&family)) {
        for (double c : kd->k.cuts) {
            out.push_back(c);
            out.push_back(c / kd->b);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::pair<double, double> RadialDensity::support() const {
    if (const auto* kd = std::get_if<KDifference>(&family)) {
        if (kd->k.kind == KShape::Kind::Constant) return {1.0, 1.0};  // h == 0
        if (kd->k.kind == KShape::Kind::Steps) {
            // k(s) = k(bs) below cuts.front()/b and k(s) = k(bs) = last value beyond cuts.back()
            if (kd->k.cuts.empty()) return {1.0, 1.0};
            return {kd->k.cuts.front() / kd->b, kd->k.cuts.back()};
        }
    }
    return {0.0, kInf};
}

double RadialDensity::small_tail(double s, int p) const {
    if (const auto* ts = std::get_if<TemperedStable>(&family))
        return ts->w * std::pow(s, p - ts->alpha) / (p - ts->alpha);
    const auto& kd = std::get<KDifference>(family);
    const auto [lo, hi] = support();
    if (s <= lo || lo >= hi) return 0.0;
    switch (kd.k.kind) {
        case KShape::Kind::Exp: {
            // e^{-l t} - e^{-l b t} <= l (b - 1) t
            const double c = kd.weight * kd.k.a * kd.k.lambda * (kd.b - 1.0);
            return c * std::pow(s, p + 1) / (p + 1);
        }
        case KShape::Kind::Steps: {
            // h(t) <= (v0 - vmin) / t on its support
            const double c = kd.weight * (kd.k.values.front() - kd.k.values.back());
            return c * std::pow(std::min(s, hi), p) / p;
        }
        case KShape::Kind::Constant:
            return 0.0;
    }
    return 0.0;
}

double RadialDensity::large_tail(double s, int i) const {
    const double T = std::log(s);
    if (const auto* ts = std::get_if<TemperedStable>(&family)) {
        if (ts->alpha > 0.0) return ts->w * std::exp(-ts->lambda * s) * gamma_tail(i, ts->alpha, T);
        if (!(ts->lambda > 0.0)) return kInf;
        // (log t)^i <= t^i for t >= 1
        const double c = i - ts->alpha;
        if (c <= 0.0) return ts->w * std::exp(-ts->lambda * s) / (ts->lambda * s);
        return ts->w * upper_gamma(c, ts->lambda, s);
    }
    const auto& kd = std::get<KDifference>(family);
    const auto [lo, hi] = support();
    if (s >= hi || lo >= hi) return 0.0;
    switch (kd.k.kind) {
        case KShape::Kind::Exp: {
            // h(t) <= a e^{-l t} / t
            const double c = kd.weight * kd.k.a;
            if (!(kd.k.lambda > 0.0)) return kd.k.a == 0.0 ? 0.0 : kInf;
            if (i == 0) return c * std::exp(-kd.k.lambda * s) / (kd.k.lambda * s);
            return c * upper_gamma(i, kd.k.lambda, s);
        }
        case KShape::Kind::Steps: {
            const double c = kd.weight * (kd.k.values.front() - kd.k.values.back());
            const double Th = std::log(hi);
            return c * (std::pow(Th, i + 1) - std::pow(T, i + 1)) / (i + 1);
        }
        case KShape::Kind::Constant:
            return 0.0;
    }
    return 0.0;
}

// ---------------------------------------------------------------------------

LevyMeasure& LevyMeasure::add_atom(Vec x, double w) {
    if (!x.allFinite() || !std::isfinite(w)) throw InvalidArgument("atom must be finite");
    if (w != 0.0) atoms.push_back(Atom{std::move(x), w});
    return *this;
}

LevyMeasure& LevyMeasure::add_lattice(Vec direction, double base, double anchor, LatticeMass mass) {
    if (!(base > 1.0) || !std::isfinite(base)) throw InvalidArgument("lattice base must be > 1");
    if (!(anchor > 0.0) || !std::isfinite(anchor)) throw InvalidArgument("lattice anchor must be > 0");
    if (!mass.empty()) lattices.push_back(ScaleLattice{unit(direction), base, anchor, std::move(mass)});
    return *this;
}

LevyMeasure& LevyMeasure::add_radial(RadialDensity r) {
    r.direction = unit(r.direction);
    if (auto* ts = std::get_if<TemperedStable>(&r.family)) {
        if (!(ts->alpha < 2.0) || !(ts->w >= 0.0) || !(ts->lambda >= 0.0))
            throw InvalidArgument("tempered-stable density needs alpha < 2, w >= 0, lambda >= 0");
    } else {
        const auto& kd = std::get<KDifference>(r.family);
        if (!(kd.b > 1.0)) throw InvalidArgument("k-difference density needs b > 1");
        if (!kd.k.nonincreasing()) throw InvalidArgument("k-function is not nonincreasing");
    }
    radials.push_back(std::move(r));
    return *this;
}

LevyMeasure& LevyMeasure::operator+=(const LevyMeasure& other) {
    atoms.insert(atoms.end(), other.atoms.begin(), other.atoms.end());
    lattices.insert(lattices.end(), other.lattices.begin(), other.lattices.end());
    radials.insert(radials.end(), other.radials.begin(), other.radials.end());
    return *this;
}

LevyMeasure k_difference_measure(const KFunction& k, double b) {
    LevyMeasure nu;
    for (const auto& part : k.parts) {
        if (!part.k.nonincreasing()) throw InvalidArgument("k-function is not nonincreasing");
        if (!(part.lambda >= 0.0)) throw InvalidArgument("spherical weight must be >= 0");
        if (part.k.kind == KShape::Kind::Constant || part.lambda == 0.0) continue;  // h == 0
        nu.add_radial(RadialDensity{part.direction, KDifference{part.k, b, part.lambda}});
    }
    return nu;
}

}  // namespace ssd
