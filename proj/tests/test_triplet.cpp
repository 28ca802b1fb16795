#include "doctest.h"
#include "ssd/triplet.hpp"

#include <cmath>

using namespace ssd;
using C = std::complex<double>;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

// direct Levy-Khintchine integrand; the real part is written as -2 sin^2(u/2) so that it
// keeps its relative accuracy near the origin
C lk_term(double z, double x) {
    const double u = z * x;
    const double h = std::sin(0.5 * u);
    return C(-2.0 * h * h, std::sin(u) - u / (1 + x * x));
}

LevyTriplet lattice_triplet(LatticeMass m, double base = 2.0, double anchor = 1.0, double dir = 1.0) {
    auto t = LevyTriplet::zero(1);
    t.nu.add_lattice(v1(dir), base, anchor, std::move(m));
    return t;
}

}  // namespace

TEST_CASE("cumulant of a Gaussian") {
    auto t = LevyTriplet::gaussian(Mat::Identity(1, 1));
    auto c = cumulant(t, v1(2.0));
    CHECK(c.value.real() == doctest::Approx(-2.0));
    CHECK(c.value.imag() == 0.0);
}

TEST_CASE("compound Poisson drift cancels the centering") {
    auto t = LevyTriplet::zero(1);
    t.nu.add_atom(v1(1.0), 1.0);
    t.gamma = v1(0.5);
    for (double z : {-3.0, -0.4, 0.7, 2.5, 5.0}) {
        auto c = cumulant(t, v1(z)).value;
        CHECK(std::abs(c - (std::exp(C(0, z)) - 1.0)) < 1e-15);
    }
    auto cp = LevyTriplet::compound_poisson({Atom{v1(1.0), 1.0}});
    CHECK(cp.gamma[0] == doctest::Approx(0.5));
}

TEST_CASE("cumulant vanishes at the origin") {
    auto t = lattice_triplet(LatticeMass::geometric(1.0, 0.5));
    t.A = Mat::Constant(1, 1, 2.0);
    t.gamma = v1(-1.0);
    CHECK(cumulant(t, v1(0.0)).value == C(0, 0));
}

TEST_CASE("lattice cumulant agrees with a brute-force sum") {
    // mass 1 on radii 2^k, k <= 0 and 2^{-k} for k >= 1
    auto m = LatticeMass::geometric(1.0, 1.0, kIndexMin, 0) + LatticeMass::geometric(1.0, 0.5, 1);
    auto t = lattice_triplet(m);
    for (double z : {0.3, 1.0, -2.0, 5.0}) {
        C brute = 0;
        for (int k = 200; k >= -400; --k) brute += m.at(k) * lk_term(z, std::ldexp(1.0, k));
        auto c = cumulant(t, v1(z), 1e-13);
        CHECK(std::abs(c.value - brute) < 1e-11);
        CHECK(c.err <= 1e-13);
    }
}

TEST_CASE("two-dimensional lattice and atoms") {
    auto t = LevyTriplet::zero(2);
    Vec dir(2);
    dir << 3.0, 4.0;
    t.nu.add_lattice(dir, 3.0, 0.7, LatticeMass::geometric(0.5, 0.2, -3));
    Vec a(2);
    a << -1.0, 0.5;
    t.nu.add_atom(a, 2.0);
    Vec z(2);
    z << 1.5, -0.75;
    Vec xi = dir / 5.0;
    C brute = 2.0 * (std::exp(C(0, z.dot(a))) - 1.0 - C(0, z.dot(a) / (1 + a.squaredNorm())));
    for (int k = 100; k >= -3; --k) {
        Vec x = 0.7 * std::pow(3.0, k) * xi;
        double u = z.dot(x);
        brute += 0.5 * std::pow(0.2, k) * (std::exp(C(0, u)) - 1.0 - C(0, u / (1 + x.squaredNorm())));
    }
    CHECK(std::abs(cumulant(t, z, 1e-13).value - brute) < 1e-12);
}

TEST_CASE("conjugate symmetry and nonpositive real part") {
    auto t = lattice_triplet(LatticeMass::geometric(2.0, 1.0 / 3.0, kIndexMin, kIndexMax), 2.0, 1.3);
    t.A = Mat::Constant(1, 1, 0.3);
    t.gamma = v1(0.2);
    t.nu.add_atom(v1(-0.4), 1.5);
    for (double z = -5.0; z <= 5.0; z += 0.37) {
        auto p = cumulant(t, v1(z)).value;
        auto n = cumulant(t, v1(-z)).value;
        CHECK(p == std::conj(n));
        CHECK(p.real() <= 0.0);
    }
}

TEST_CASE("radial density quadrature matches an independent trapezoid oracle") {
    auto t = LevyTriplet::zero(1);
    t.nu.add_radial(RadialDensity{v1(1.0), TemperedStable{1.0, 0.7, 1.5}});
    t.nu.add_radial(RadialDensity{v1(-1.0), TemperedStable{0.5, 1.2, 2.0}});
    for (double z : {0.5, 2.0, 5.0}) {
        C oracle = 0;
        const double h = 1e-3;
        for (double s = -60.0; s <= 6.0; s += h) {
            const double r = std::exp(s);
            const double w1 = std::pow(r, -1.7) * std::exp(-1.5 * r) * r;
            const double w2 = 0.5 * std::pow(r, -2.2) * std::exp(-2.0 * r) * r;
            oracle += h * (w1 * lk_term(z, r) + w2 * lk_term(z, -r));
        }
        auto c = cumulant(t, v1(z), 1e-10);
        CHECK(std::abs(c.value - oracle) < 1e-8);
    }
}

TEST_CASE("validate") {
    CHECK(validate(LevyTriplet::gaussian(Mat::Identity(2, 2))).ok);
    auto bad = LevyTriplet::zero(1);
    bad.nu.add_atom(v1(0.0), 1.0);
    auto rep = validate(bad);
    CHECK_FALSE(rep.ok);
    CHECK(rep.violations.front() == "mass at origin");

    Mat A(2, 2);
    A << 1, 0, 0, -1e-3;
    CHECK_FALSE(validate(LevyTriplet::gaussian(A)).ok);
    A << 1, 0.5, 0.4, 1;
    CHECK_FALSE(validate(LevyTriplet::gaussian(A)).ok);
}

TEST_CASE("validate accepts exactly the convergent lattices") {
    // small-scale side: sum q^k 4^k over k <= 0 converges iff 4q > 1
    CHECK_FALSE(validate(lattice_triplet(LatticeMass::geometric(1.0, 0.25, kIndexMin, 0))).ok);
    CHECK(validate(lattice_triplet(LatticeMass::geometric(1.0, 0.26, kIndexMin, 0))).ok);
    // large-scale side: total mass must be finite
    CHECK_FALSE(validate(lattice_triplet(LatticeMass::geometric(1.0, 1.0, 0))).ok);
    CHECK(validate(lattice_triplet(LatticeMass::geometric(1.0, 0.99, 0))).ok);
    CHECK_FALSE(validate(lattice_triplet(LatticeMass::power(1.0, 1.0))).ok);
    CHECK(validate(lattice_triplet(LatticeMass::power(1.0, 1.01))).ok);
    // radial: tempered stable needs alpha < 2 and some decay at infinity
    auto r = LevyTriplet::zero(1);
    r.nu.add_radial(RadialDensity{v1(1.0), TemperedStable{1.0, 0.0, 0.0}});
    CHECK_FALSE(validate(r).ok);
}

TEST_CASE("log moments") {
    LevyMeasure inside;
    inside.add_atom(v1(0.5), 3.0).add_atom(v1(-1.0), 1.0);
    CHECK(log_moment(inside, 1) == 0.0);

    auto lat = lattice_triplet(LatticeMass::geometric(1.0, 0.5, 1));
    const double lm = log_moment(lat.nu, 1);
    CHECK(lm == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
    double partial = 0.0;
    for (int k = 1000000; k >= 1; --k) partial += std::ldexp(1.0, -k) * k * std::log(2.0);
    CHECK(std::abs(lm - partial) <= 1e-8 * partial);

    CHECK(std::isinf(log_moment(lattice_triplet(LatticeMass::geometric(1.0, 1.0, 1)).nu, 1)));

    // power law k^{-3}: first moment finite, second infinite
    auto p = lattice_triplet(LatticeMass::power(1.0, 3.0), 10.0);
    double partial_p = 0.0;
    for (int k = 1000000; k >= 1; --k) partial_p += std::pow(double(k), -2.0) * std::log(10.0);
    CHECK(std::abs(log_moment(p.nu, 1) - partial_p) <= 1e-5 * partial_p);  // partial sum misses ~1e-6
    CHECK(log_moment(p.nu, 1) == doctest::Approx(M_PI * M_PI / 6 * std::log(10.0)).epsilon(1e-13));
    CHECK(std::isinf(log_moment(p.nu, 2)));

    // radial tempered stable: int_1^inf log s s^{-1.5} e^{-s} ds
    LevyMeasure rad;
    rad.add_radial(RadialDensity{v1(1.0), TemperedStable{1.0, 0.5, 1.0}});
    double oracle = 0.0;
    for (double t = 0.0; t < 8.0; t += 1e-5) {
        const double s0 = std::exp(t), s1 = std::exp(t + 1e-5);
        oracle += 0.5e-5 * (t * std::pow(s0, -0.5) * std::exp(-s0) + (t + 1e-5) * std::pow(s1, -0.5) * std::exp(-s1));
    }
    CHECK(log_moment(rad, 1) == doctest::Approx(oracle).epsilon(1e-7));
}

TEST_CASE("polar decomposition of exact measures") {
    LevyMeasure nu;
    Vec x(2);
    x << 3.0, 4.0;
    nu.add_atom(x, 2.0);
    auto p = polar_atoms(nu);
    REQUIRE(p.size() == 1);
    CHECK(p[0].direction[0] == doctest::Approx(0.6));
    CHECK(p[0].direction[1] == doctest::Approx(0.8));
    CHECK(p[0].radial_atoms[0].first == doctest::Approx(5.0));
    CHECK(p[0].radial_atoms[0].second == 2.0);
    CHECK(p[0].lambda == 1.0);

    LevyMeasure two;
    two.add_atom(v1(1.0), 1.0).add_atom(v1(-1.0), 1.0);
    CHECK(polar_atoms(two).size() == 2);

    LevyMeasure lat;
    lat.add_lattice(x, 2.0, 1.0, LatticeMass::geometric(1.0, 0.5, 0));
    auto q = polar_atoms(lat);
    REQUIRE(q.size() == 1);
    CHECK(q[0].radial_lattices.size() == 1);
    CHECK(q[0].radial_lattices[0].base == 2.0);

    LevyMeasure rad;
    rad.add_radial(RadialDensity{v1(1.0), TemperedStable{}});
    CHECK_THROWS_AS(polar_atoms(rad), Unsupported);
}
