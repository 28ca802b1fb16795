#pragma once

#include "ssd/levy_measure.hpp"

#include <optional>
#include <vector>

namespace ssd {

/// One ray of a discrete Levy measure, written on a single geometric lattice:
/// mass(k) sits at anchor * base^k * direction, with anchor in [1, base).
struct SkeletonGroup {
    Vec direction;
    double base = 2.0;
    double anchor = 1.0;
    LatticeMass mass;

    double radius(std::int64_t k) const { return anchor * std::pow(base, static_cast<double>(k)); }
    /// Index step that realizes scaling by b, if b is an integer power of the base.
    std::optional<std::int64_t> step_for(double b) const;
};

/// Canonical exact form of an Atoms + ScaleLattice measure. Points of different groups
/// never coincide, so sign questions decompose group by group.
struct Skeleton {
    std::vector<SkeletonGroup> groups;

    /// Atoms join an existing group whose lattice contains them, otherwise they start a
    /// new group with the preferred base. Lattices whose base is not compatible with
    /// the preferred base are kept only if they have infinite support; finite ones are
    /// broken up into atoms.
    static Skeleton from_measure(const LevyMeasure& nu, double preferred_base);

    /// Back to a LevyMeasure; groups with at most max_atoms points become atoms.
    LevyMeasure to_measure(std::size_t max_atoms = 64) const;
};

/// max over lattice points with index in [lo, hi] (per skeleton group) of
/// |a - b| / max(1, |a|), with both measures written on a common skeleton.
double measure_distance(const LevyMeasure& a, const LevyMeasure& b, double base, std::int64_t lo = -200,
                        std::int64_t hi = 200);

}  // namespace ssd
