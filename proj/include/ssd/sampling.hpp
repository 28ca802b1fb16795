#pragma once

#include "ssd/triplet.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace ssd {

/// One independent random stream. Streams are keyed by (seed, index) so that block
/// results do not depend on how blocks are scheduled.
struct RngStream {
    std::mt19937_64 eng;
    std::normal_distribution<double> gauss{0.0, 1.0};
    std::uniform_real_distribution<double> unif{0.0, 1.0};

    RngStream(std::uint64_t seed, std::uint64_t index);
};

/// Derived seed for an independent sub-experiment.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

struct SamplerOptions {
    double cf_tol = 1e-4;  // bound on |t C_small(z) - t C_gauss(z)| for |z| <= zmax
    double zmax = 5.0;
    std::size_t max_points = 1'000'000;
    double tail_mass_tol = 1e-14;  // large-jump lattice mass dropped, relative to the rate
};

/// How the increment law is realized. Exported with every batch.
struct SamplerInfo {
    std::string scheme;          // "exact" or "truncated-gaussian"
    double epsilon = 0.0;        // lattice jumps with |x| < epsilon are replaced
    double small_m3 = 0.0;       // int_{|x|<eps} |x|^3 nu(dx)
    double cf_bound = 0.0;       // t zmax^3 small_m3 / 6
    double small_variance = 0.0; // trace of the compensating covariance (per unit time)
    double dropped_tail_mass = 0.0;
    std::size_t jump_points = 0;
    double rate = 0.0;           // jump intensity per unit time
};

/// Draws X_t for the Levy process with X_1 ~ x1. Exact for Gaussian, drift and finitely
/// many jump points; lattice jumps below epsilon are replaced by a Gaussian with the same
/// covariance and the matching mean shift.
class IncrementSampler {
public:
    IncrementSampler(const LevyTriplet& x1, double t, SamplerOptions opt = {});

    int dim() const { return static_cast<int>(mean_.size()); }
    double t() const { return t_; }
    const SamplerInfo& info() const { return info_; }

    /// Adds one draw of X_t to out (length dim()).
    void add_draw(RngStream& rng, double* out) const;
    Vec draw(RngStream& rng) const;

private:
    double t_;
    Vec mean_;
    Mat root_;  // root_ root_^T = t (A + small-jump covariance)
    bool has_gauss_ = false;
    std::vector<Vec> points_;
    std::vector<double> cum_;  // cumulative jump weights
    double rate_t_ = 0.0;
    SamplerInfo info_;
};

struct SampleBatch {
    std::size_t n = 0;
    Mat values;  // d x n
    std::uint64_t seed = 0;
    double t = 1.0;
    SamplerInfo info;
};

inline constexpr std::size_t kSampleBlock = 4096;

/// n i.i.d. draws of X_t, generated in blocks of kSampleBlock on independent streams.
SampleBatch sample(const LevyTriplet& spec, double t, std::size_t n, std::uint64_t seed,
                   SamplerOptions opt = {});

struct EcfResult {
    std::vector<Vec> grid;
    std::vector<Complex> values;
    double radius = 0.0;  // q / sqrt(n)
};

/// Empirical characteristic function (1/n) sum_j e^{i<z, X_j>} with radius q / sqrt(n).
EcfResult ecf(const Mat& values, const std::vector<Vec>& grid, double q = Tolerances::mc_multiplier);
inline EcfResult ecf(const SampleBatch& batch, const std::vector<Vec>& grid,
                     double q = Tolerances::mc_multiplier) {
    return ecf(batch.values, grid, q);
}

}  // namespace ssd
