#include "doctest.h"
#include "ssd/grid.hpp"
#include "ssd/parallel.hpp"
#include "ssd/sampling.hpp"

#include <cmath>

using namespace ssd;
using C = std::complex<double>;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

LevyTriplet cp1() { return LevyTriplet::compound_poisson({Atom{v1(1.0), 1.0}}); }

double max_ecf_gap(const SampleBatch& b, const LevyTriplet& spec, const std::vector<Vec>& grid) {
    const auto e = ecf(b, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        worst = std::max(worst, std::abs(e.values[i] - std::exp(b.t * cumulant(spec, grid[i]).value)));
    return worst;
}

}  // namespace

TEST_CASE("Gaussian sample variance") {
    const auto b = sample(LevyTriplet::gaussian(Mat::Identity(1, 1)), 1.0, 100000, 7);
    const double mean = b.values.mean();
    const double var = (b.values.array() - mean).square().sum() / (b.n - 1);
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.03);
    CHECK(b.info.scheme == "exact");
}

TEST_CASE("compound Poisson jump counts") {
    const auto b = sample(cp1(), 2.0, 100000, 11);
    // jumps sit at 1 and the drift cancels the centering, so each value is the count
    for (Eigen::Index j = 0; j < 50; ++j) CHECK(b.values(0, j) == std::round(b.values(0, j)));
    CHECK(std::abs(b.values.mean() - 2.0) < 0.03);
}

TEST_CASE("same seed gives identical batches for any thread count") {
    const auto spec = cp1();
    set_thread_count(1);
    const auto a = sample(spec, 1.0, 20000, 42);
    set_thread_count(4);
    const auto b = sample(spec, 1.0, 20000, 42);
    set_thread_count(0);
    const auto c = sample(spec, 1.0, 20000, 43);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
}

TEST_CASE("ecf basics") {
    const Mat zeros = Mat::Zero(1, 10);
    const auto e = ecf(zeros, axis_grid(1, 5.0, 11));
    for (const auto& v : e.values) CHECK(v == C(1.0, 0.0));
    CHECK_THROWS_AS(ecf(Mat::Zero(1, 1), axis_grid(1)), InvalidArgument);
    CHECK(ecf(Mat::Zero(1, 400), {v1(1)}).radius == doctest::Approx(2.0 * ecf(Mat::Zero(1, 1600), {v1(1)}).radius));

    const auto g = sample(LevyTriplet::gaussian(Mat::Identity(1, 1)), 1.0, 100000, 3);
    const auto eg = ecf(g, {v1(1.0)});
    CHECK(std::abs(eg.values[0] - std::exp(-0.5)) <= eg.radius);
}

TEST_CASE("ecf matches the analytic characteristic function") {
    const auto grid1 = axis_grid(1, 3.0, 21);
    auto cp = LevyTriplet::compound_poisson({{v1(1.0), 0.7}, {v1(-2.5), 0.4}});
    cp.gamma[0] += 0.2;
    for (const auto& spec : {LevyTriplet::gaussian(Mat::Constant(1, 1, 0.5)), cp}) {
        const auto b = sample(spec, 1.5, 100000, 5);
        CHECK(max_ecf_gap(b, spec, grid1) <= 3.0 / std::sqrt(1e5));
    }
    Mat A(2, 2);
    A << 1.0, 0.3, 0.3, 0.5;
    auto g2 = LevyTriplet::gaussian(A);
    g2.nu.add_atom((Vec(2) << 0.5, -1.0).finished(), 0.8);
    const auto b2 = sample(g2, 1.0, 100000, 9);
    CHECK(max_ecf_gap(b2, g2, axis_diagonal_grid(2, 3.0, 13)) <= 3.0 / std::sqrt(1e5));
}

TEST_CASE("infinite-activity lattice through small-jump compensation") {
    // semi-stable lattice with alpha = 1: mass 2^{-k} at 2^k for all k
    auto spec = LevyTriplet::zero(1);
    spec.nu.add_lattice(v1(1.0), 2.0, 1.0, LatticeMass::geometric(1.0, 0.5));
    SamplerOptions opt;
    opt.zmax = 3.0;
    const auto b = sample(spec, 1.0, 100000, 21, opt);
    CHECK(b.info.scheme == "truncated-gaussian");
    CHECK(b.info.epsilon > 0.0);
    CHECK(b.info.cf_bound <= 1e-4);
    CHECK(b.info.small_variance > 0.0);
    CHECK(max_ecf_gap(b, spec, axis_grid(1, 3.0, 21)) <= 3.0 / std::sqrt(1e5) + b.info.cf_bound);
}

TEST_CASE("high jump rates are drawn per lattice point") {
    // alpha = 1.5: about 4e5 jumps per unit time over a few dozen points
    auto spec = LevyTriplet::zero(1);
    spec.nu.add_lattice(v1(1.0), 2.0, 1.0, LatticeMass::geometric(1.0, std::pow(2.0, -1.5)));
    SamplerOptions opt;
    opt.zmax = 3.0;
    const auto b = sample(spec, 1.0, 100000, 22, opt);
    CHECK(b.info.rate > 10.0 * static_cast<double>(b.info.jump_points));
    CHECK(max_ecf_gap(b, spec, axis_grid(1, 3.0, 21)) <= 3.0 / std::sqrt(1e5) + b.info.cf_bound);
}

TEST_CASE("sampling preconditions") {
    CHECK_THROWS_AS(sample(cp1(), 0.0, 10, 1), InvalidArgument);
    CHECK_THROWS_AS(sample(cp1(), 1.0, 0, 1), InvalidArgument);
    auto bad = cp1();
    bad.nu.atoms[0].w = -1.0;
    CHECK_THROWS_AS(sample(bad, 1.0, 10, 1), InvalidArgument);
}
