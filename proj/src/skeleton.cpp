#include "ssd/skeleton.hpp"
#include "ssd/triplet.hpp"

#include <cmath>
#include <numeric>

namespace ssd {

namespace {

constexpr double kIndexSlack = 1e-9;

bool same_base(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(a, b); }

// anchor in [1, base) and the index offset so that r0 = anchor * base^off
std::pair<double, std::int64_t> canonical_anchor(double r0, double base) {
    const double e = std::log(r0) / std::log(base);
    auto off = static_cast<std::int64_t>(std::floor(e + kIndexSlack));
    double a = r0 / std::pow(base, static_cast<double>(off));
    if (a < 1.0) a = 1.0;  // rounding just below an exact power
    return {a, off};
}

// index k with r = anchor * base^k, if r lies on the lattice
std::optional<std::int64_t> lattice_index(const SkeletonGroup& g, double r) {
    const double e = std::log(r / g.anchor) / std::log(g.base);
    const double k = std::round(e);
    if (std::abs(e - k) > kIndexSlack) return std::nullopt;
    return static_cast<std::int64_t>(k);
}

// Whether two lattices of one ray share points: base1 = beta^p, base2 = beta^q with
// coprime p, q, and the anchors differ by an integer power of beta.
bool lattices_overlap(const SkeletonGroup& a, const SkeletonGroup& b) {
    const double ratio = std::log(a.base) / std::log(b.base);
    for (int q = 1; q <= 64; ++q) {
        const double p = std::round(ratio * q);
        if (p < 1.0 || std::abs(ratio * q - p) > 1e-9 * q) continue;
        const double beta = std::pow(a.base, 1.0 / p);
        const double e = std::log(a.anchor / b.anchor) / std::log(beta);
        return std::abs(e - std::round(e)) <= kIndexSlack * p;
    }
    return false;  // incommensurable bases
}

}  // namespace

std::optional<std::int64_t> SkeletonGroup::step_for(double b) const {
    const double s = std::log(b) / std::log(base);
    const double k = std::round(s);
    if (k < 1.0 || std::abs(std::pow(base, k) - b) > 1e-12 * b) return std::nullopt;
    return static_cast<std::int64_t>(k);
}

Skeleton Skeleton::from_measure(const LevyMeasure& nu, double preferred) {
    if (!nu.radials.empty()) throw Unsupported("radial densities have no exact lattice form");
    Skeleton sk;
    std::vector<Atom> atoms = nu.atoms;

    for (const auto& L : nu.lattices) {
        const bool compatible =
            SkeletonGroup{L.direction, L.base, 1.0, {}}.step_for(preferred).has_value() ||
            same_base(L.base, preferred);
        if (!compatible && L.mass.finite_support()) {
            for (std::int64_t k = L.mass.lowest(); k <= L.mass.highest(); ++k) {
                const double w = L.mass.at(k);
                if (w != 0.0) atoms.push_back(Atom{L.radius(k) * L.direction, w});
            }
            continue;
        }
        const auto [anchor, off] = canonical_anchor(L.anchor, L.base);
        SkeletonGroup g{L.direction, L.base, anchor, L.mass.shifted(-off)};
        bool merged = false;
        for (auto& h : sk.groups) {
            if (!same_direction(h.direction, g.direction)) continue;
            if (same_base(h.base, g.base)) {
                const auto k = lattice_index(h, g.anchor);
                if (k) {
                    h.mass = h.mass + g.mass.shifted(-*k);
                    merged = true;
                    break;
                }
            } else if (lattices_overlap(h, g)) {
                throw Unsupported("overlapping lattices with different bases on one ray");
            }
        }
        if (!merged) sk.groups.push_back(std::move(g));
    }

    for (const auto& a : atoms) {
        const double r = a.x.norm();
        if (r == 0.0) throw InvalidArgument("mass at origin");
        const Vec xi = a.x / r;
        bool placed = false;
        for (auto& g : sk.groups) {
            if (!same_direction(g.direction, xi)) continue;
            if (const auto k = lattice_index(g, r)) {
                g.mass = g.mass + LatticeMass::point(*k, a.w);
                placed = true;
                break;
            }
        }
        if (placed) continue;
        const auto [anchor, off] = canonical_anchor(r, preferred);
        SkeletonGroup g{xi, preferred, anchor, LatticeMass::point(off, a.w)};
        for (const auto& h : sk.groups)
            if (same_direction(h.direction, xi) && !same_base(h.base, preferred) && lattices_overlap(h, g))
                throw Unsupported("atom lies on a lattice of a different base");
        sk.groups.push_back(std::move(g));
    }
    return sk;
}

LevyMeasure Skeleton::to_measure(std::size_t max_atoms) const {
    LevyMeasure nu;
    for (const auto& g : groups) {
        if (g.mass.empty()) continue;
        const bool small = g.mass.finite_support() &&
                           static_cast<std::size_t>(g.mass.highest() - g.mass.lowest() + 1) <= max_atoms;
        if (small) {
            for (std::int64_t k = g.mass.lowest(); k <= g.mass.highest(); ++k) {
                const double w = g.mass.at(k);
                if (w != 0.0) nu.add_atom(g.radius(k) * g.direction, w);
            }
        } else {
            nu.add_lattice(g.direction, g.base, g.anchor, g.mass);
        }
    }
    return nu;
}

double measure_distance(const LevyMeasure& a, const LevyMeasure& b, double base, std::int64_t lo,
                        std::int64_t hi) {
    LevyMeasure diff = a;
    for (const auto& at : b.atoms) diff.atoms.push_back(Atom{at.x, -at.w});
    for (const auto& L : b.lattices) diff.lattices.push_back(ScaleLattice{L.direction, L.base, L.anchor, L.mass.scaled(-1.0)});
    const auto d = Skeleton::from_measure(diff, base);
    const auto ref = Skeleton::from_measure(a, base);
    double worst = 0.0;
    for (const auto& g : d.groups) {
        const SkeletonGroup* r = nullptr;
        for (const auto& h : ref.groups)
            if (same_direction(h.direction, g.direction) && std::abs(h.base - g.base) <= 1e-12 * g.base &&
                std::abs(h.anchor - g.anchor) <= 1e-9 * g.anchor)
                r = &h;
        for (std::int64_t k = lo; k <= hi; ++k) {
            const double scale = std::max(1.0, r ? std::abs(r->mass.at(k)) : 0.0);
            worst = std::max(worst, std::abs(g.mass.at(k)) / scale);
        }
    }
    return worst;
}

}  // namespace ssd
