#pragma once

#include "ssd/sampling.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ssd {

/// Initial state M: a constant, an independent infinitely divisible law, or the limit law.
struct OUInit {
    enum class Kind { Constant, Law, Limit };
    Kind kind = Kind::Constant;
    Vec value;                       // Constant
    std::optional<LevyTriplet> law;  // Law

    static OUInit constant(Vec v) { return {Kind::Constant, std::move(v), std::nullopt}; }
    static OUInit from_law(LevyTriplet t) { return {Kind::Law, Vec(), std::move(t)}; }
    static OUInit limit() { return {Kind::Limit, Vec(), std::nullopt}; }
};

struct OUConfig {
    double b = 2.0;
    double c = 1.0;
    double t0 = 0.0;
    double T = 1.0;
    OUInit init = OUInit::constant(Vec::Zero(1));

    void validate() const;
    /// [c t], snapped so that t = k/c maps to k.
    std::int64_t epoch(double t) const;
    std::int64_t first_epoch() const { return epoch(t0); }
    std::int64_t last_epoch() const { return epoch(T); }
};

/// States Z at epochs k0..k1 (Z at k0 is M) and the increments that drove them.
struct OUPath {
    double b = 2.0;
    double c = 1.0;
    std::int64_t k0 = 0;
    std::vector<Vec> states;      // states[i] = Z at epoch k0 + i
    std::vector<Vec> increments;  // increments[i] = X_{(k0+i+1)/c} - X_{(k0+i)/c}
    std::uint64_t seed = 0;

    std::int64_t k1() const { return k0 + static_cast<std::int64_t>(states.size()) - 1; }
    /// Z_t for a real time t (piecewise constant, right-continuous).
    const Vec& at(double t) const;
    const Vec& M() const { return states.front(); }
};

/// Z_k = (Z_{k-1} + dX_k) / b from Z_{k0} = M.
OUPath solve_path(const std::vector<Vec>& increments, const OUConfig& cfg, const Vec& M);

/// Samples M and the increments (X_{1/c} draws), then runs the recursion.
OUPath simulate_path(const LevyTriplet& noise, const OUConfig& cfg, std::uint64_t seed);

/// b^{-(k-k0)} M + b^{-k} sum_{l=k0+1}^{k} b^{l-1} dX_l, evaluated without the recursion.
Vec closed_form_state(const OUPath& path, std::int64_t k);

struct LangevinReport {
    double max_abs = 0.0;
    double max_rel = 0.0;  // relative to the largest magnitude on the path
    std::int64_t worst_epoch = 0;
};

/// |Z_t - M - (X_t - X_{t0}) + (b - 1) sum_{t0 < k/c <= t} Z_{k/c}| over all epochs.
LangevinReport verify_langevin(const OUPath& path);

/// (1/c) sum_{k>=0} C_X1(b^{-k-1} z).
Bounded<Complex> limit_cumulant(const LevyTriplet& noise, const OUConfig& cfg, const Vec& z, double tol = 1e-12);

/// Cumulant of Z_t given Z_s = x.
Complex transition_cumulant(const LevyTriplet& noise, const OUConfig& cfg, double s, double t, const Vec& x,
                            const Vec& z, double tol = 1e-12);

struct LimitTruncation {
    int K = 0;             // warmup epochs realizing the limit law
    double bound = 0.0;    // sup over probes of the discarded cumulant tail
};

/// Smallest K with (1/c) |sum_{k>=K} C_X1(b^{-k-1} z)| <= tol for |z| <= zmax.
LimitTruncation limit_truncation(const LevyTriplet& noise, const OUConfig& cfg, double zmax, double tol = 1e-4);

/// n independent paths of the state recursion; returns the d x n states at each epoch in
/// `record` (epoch offsets from the start, 0 = M). Deterministic in seed.
struct StateSamples {
    std::vector<std::int64_t> offsets;
    std::vector<Mat> states;
    LimitTruncation truncation;  // filled for limit-law init
    SamplerInfo noise_info;
};
StateSamples simulate_states(const LevyTriplet& noise, const OUConfig& cfg, std::size_t n,
                             std::vector<std::int64_t> record, std::uint64_t seed, double zmax = 5.0);

struct LimitReport {
    double radius = 0.0;
    double bias = 0.0;  // truncation and initial-state terms
    std::vector<double> dev_first;   // |ECF - exp(limit)| per grid point, first init
    std::vector<double> dev_second;  // same for the second init
    double max_dev_first = 0.0;
    double max_dev_second = 0.0;
    double max_init_gap = 0.0;  // between the two inits
    bool pass = false;
};

/// Terminal ECF after `steps` epochs against the limit law, for two initial specs.
LimitReport validate_limit(const LevyTriplet& noise, const OUConfig& cfg, const OUInit& first,
                           const OUInit& second, std::size_t n, int steps, const std::vector<Vec>& grid,
                           std::uint64_t seed);

struct StationarityReport {
    std::vector<int> epochs;
    std::vector<double> max_dev;  // per epoch
    double radius = 0.0;
    double bias = 0.0;
    bool pass = false;
};

/// Limit-law init: the ECF at each listed epoch must match exp(limit_cumulant).
StationarityReport stationarity_check(const LevyTriplet& noise, const OUConfig& cfg, std::size_t n,
                                      const std::vector<int>& epochs, const std::vector<Vec>& grid,
                                      std::uint64_t seed);

struct ShiftReport {
    double shift = 0.0;
    double radius = 0.0;
    double max_marginal_gap = 0.0;
    double max_pair_gap = 0.0;
    bool within_radius = false;  // both gaps <= 2 radius
};

struct SemiStationaryResult {
    std::vector<Mat> states;  // epochs 0..[c horizon]
    LimitTruncation truncation;
    ShiftReport report;       // shift by 1/c
};

/// Two-sided process on [0, horizon]: Z_0 drawn from the limit law (warmup epochs of an
/// independent copy of the noise on the negative axis), then the recursion. warmup = 0
/// picks K from limit_truncation.
SemiStationaryResult semistationary_path(const LevyTriplet& noise, const OUConfig& cfg, int warmup, double horizon,
                                         std::size_t n, std::uint64_t seed);

/// ECF gaps between Z at times and the same times moved by `shift`, for marginals (grid1)
/// and for the listed time pairs (grid2, d = 2 * dim).
ShiftReport shift_invariance(const LevyTriplet& noise, const OUConfig& cfg, const std::vector<double>& times,
                             const std::vector<std::pair<double, double>>& pairs, double shift,
                             const std::vector<Vec>& grid1, const std::vector<Vec>& grid2, std::size_t n,
                             std::uint64_t seed);

struct DivergenceReport {
    std::vector<double> times;
    std::vector<double> estimates;  // |E e^{i <b z0, Z_t - Z_{t-1/c}>}|
    double bound = 0.0;             // |mu^(z0)|^{1/c}
    double radius = 0.0;
    bool pass = false;
};

/// Increments over one epoch keep a characteristic function bounded away from 1, so Z_t
/// does not converge in probability.
DivergenceReport divergence_diagnostic(const LevyTriplet& noise, const OUConfig& cfg, const Vec& z0,
                                       const std::vector<double>& times, std::size_t n, std::uint64_t seed);

}  // namespace ssd
