#include "doctest.h"
#include "ssd/grid.hpp"
#include "ssd/phi_map.hpp"
#include "ssd/skeleton.hpp"

#include <cmath>

using namespace ssd;
using C = std::complex<double>;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

LevyTriplet cp1(double w = 1.0) { return LevyTriplet::compound_poisson({Atom{v1(1.0), w}}); }

// mass 1 for k <= 0 and q^k for k >= 1 on radii base^k, q = min(1/2, 1/base). The large
// side decays at least like 1/r: phases z x beyond 1e16 carry no information in double.
LevyTriplet lattice_rho(double base, const Vec& dir) {
    auto t = LevyTriplet::zero(static_cast<int>(dir.size()));
    const double q = std::min(0.5, 1.0 / base);
    t.nu.add_lattice(dir, base, 1.0,
                     LatticeMass::geometric(1.0, 1.0, kIndexMin, 0) + LatticeMass::geometric(1.0, q, 1));
    t.gamma = Vec::Constant(dir.size(), 0.25);
    return t;
}

std::vector<LevyTriplet> corpus(int d, double base) {
    std::vector<LevyTriplet> out;
    if (d == 1) {
        out.push_back(LevyTriplet::gaussian(Mat::Constant(1, 1, 1.5)));
        auto cp = LevyTriplet::compound_poisson({{v1(1.0), 1.0}, {v1(-3.0), 0.5}, {v1(0.2), 2.0}});
        cp.gamma[0] += 0.3;
        out.push_back(cp);
        out.push_back(lattice_rho(base, v1(1.0)));
    } else {
        Mat A(2, 2);
        A << 2.0, 0.5, 0.5, 1.0;
        out.push_back(LevyTriplet::gaussian(A));
        out.push_back(LevyTriplet::compound_poisson({{v2(1.0, 0.0), 1.0}, {v2(-0.5, 2.0), 0.7}}));
        out.push_back(lattice_rho(base, v2(0.6, 0.8)));
    }
    return out;
}

}  // namespace

TEST_CASE("forward cumulant of a standard Gaussian") {
    auto c = phi_forward_cumulant(LevyTriplet::gaussian(Mat::Identity(1, 1)), SpanConfig(2.0), v1(1.0));
    CHECK(std::abs(c.value - C(-2.0 / 3.0, 0.0)) < 1e-15);
    CHECK(phi_forward_cumulant(cp1(), SpanConfig(2.0), v1(0.0)).value == C(0, 0));
}

TEST_CASE("forward cumulant of CP(delta_1) against a brute-force series") {
    for (double z : {0.5, 1.0, -2.0, 4.5}) {
        C brute = 0;
        for (int j = 0; j < 10000; ++j) brute += std::exp(C(0, std::ldexp(z, -j))) - 1.0;
        auto c = phi_forward_cumulant(cp1(), SpanConfig(2.0), v1(z));
        CHECK(std::abs(c.value - brute) < 1e-12);
        CHECK(c.err <= 1e-12);
    }
}

TEST_CASE("weighted point sum against direct summation") {
    for (int m : {0, 1, 3})
        for (double b : {1.1, 2.0, 10.0})
            for (double r : {0.01, 1.0, 30.0, 1e6})
                for (double z : {0.3, -2.0}) {
                    const double u = z * r;
                    C brute = 0;
                    double w = 1.0;  // C(k+m, m)
                    for (int k = 0; k < 4000; ++k) {
                        const double v = u * std::pow(b, -k);
                        const double h = std::sin(0.5 * v);
                        brute += w * C(-2.0 * h * h, std::sin(v) - v / (1.0 + r * r));
                        w = w * (k + m + 1) / (k + 1);
                    }
                    const C got = weighted_point(u, r, b, m);
                    CHECK(std::abs(got - brute) <= 1e-9 * std::max(1.0, std::abs(brute)));
                }
}

TEST_CASE("factorization identity over the corpus") {
    for (int d : {1, 2})
        for (double b : {1.1, 2.0, 10.0}) {
            const SpanConfig cfg(b);
            const auto grid = axis_grid(d, 5.0, 21);
            for (const auto& rho : corpus(d, b)) {
                double worst = 0.0;
                for (const auto& z : grid) {
                    const auto a = phi_forward_cumulant(rho, cfg, z, 1e-10);
                    const auto c = phi_forward_cumulant(rho, cfg, Vec(z / b), 1e-10);
                    const auto r = cumulant(rho, z);
                    worst = std::max(worst, std::abs(a.value - c.value - r.value));
                }
                INFO("d=" << d << " b=" << b << " nu lattices=" << rho.nu.lattices.size());
                CHECK(worst <= 1e-8);
            }
        }
}

TEST_CASE("Gaussian forward scaling") {
    for (double b : {1.1, 2.0, 10.0}) {
        Mat A(2, 2);
        A << 1.0, 0.3, 0.3, 2.0;
        const auto f = phi_forward_triplet(LevyTriplet::gaussian(A), SpanConfig(b));
        CHECK((f.A - A / (1.0 - 1.0 / (b * b))).norm() <= 1e-15 * A.norm() / (1.0 - 1.0 / (b * b)));
    }
    const auto f = phi_forward_triplet(LevyTriplet::gaussian(Mat::Constant(1, 1, 3.0)), SpanConfig(2.0));
    CHECK(f.A(0, 0) == doctest::Approx(4.0));
}

TEST_CASE("forward triplet of CP(delta_1) is the lattice of atoms 2^{-j}") {
    const auto f = phi_forward_triplet(cp1(), SpanConfig(2.0));
    REQUIRE(f.nu.lattices.size() == 1);
    const auto& L = f.nu.lattices[0];
    CHECK(L.base == 2.0);
    for (int j = 0; j < 60; ++j) {
        const std::int64_t k = static_cast<std::int64_t>(std::round(std::log2(std::ldexp(1.0, -j) / L.anchor)));
        CHECK(L.radius(k) == doctest::Approx(std::ldexp(1.0, -j)));
        CHECK(L.mass.at(k) == doctest::Approx(1.0));
    }
    CHECK(L.mass.total(L.last_inside_unit() + 1, kIndexMax) == 0.0);
    // its cumulant matches the forward series
    for (double z : {0.7, -3.0}) {
        const auto a = cumulant(f, v1(z)).value;
        const auto s = phi_forward_cumulant(cp1(), SpanConfig(2.0), v1(z)).value;
        CHECK(std::abs(a - s) < 1e-11);
    }
}

TEST_CASE("roundtrip inverse of forward triplet") {
    for (int d : {1, 2})
        for (double b : {1.1, 2.0, 10.0}) {
            const SpanConfig cfg(b);
            for (const auto& rho : corpus(d, b)) {
                const auto mu = phi_forward_triplet(rho, cfg);
                const auto inv = phi_inverse(mu, cfg);
                CHECK(inv.valid);
                CHECK((inv.rho.A - rho.A).norm() <= 1e-10 * std::max(1.0, rho.A.norm()));
                CHECK((inv.rho.gamma - rho.gamma).norm() <= 1e-10);
                CHECK(measure_distance(rho.nu, inv.rho.nu, b) <= 1e-10);
            }
        }
}

TEST_CASE("inverse examples") {
    const SpanConfig cfg(2.0);
    auto g = phi_inverse(LevyTriplet::gaussian(Mat::Constant(1, 1, 4.0 / 3.0)), cfg);
    CHECK(g.valid);
    CHECK(g.rho.A(0, 0) == doctest::Approx(1.0).epsilon(1e-15));

    // atoms at 2^{-j}, j >= 0, each of mass 1
    auto mu = LevyTriplet::zero(1);
    mu.nu.add_lattice(v1(1.0), 2.0, 1.0, LatticeMass::geometric(1.0, 1.0, kIndexMin, 0));
    auto inv = phi_inverse(mu, cfg);
    CHECK(inv.valid);
    REQUIRE(inv.rho.nu.atoms.size() == 1);
    CHECK(inv.rho.nu.atoms[0].x[0] == doctest::Approx(1.0));
    CHECK(inv.rho.nu.atoms[0].w == doctest::Approx(1.0));
    CHECK(inv.rho.nu.lattices.empty());

    // CP(delta_1) alone: nu - nu(2.) = delta_1 - delta_{1/2}
    auto bad = phi_inverse(cp1(), cfg);
    CHECK_FALSE(bad.valid);
    REQUIRE(bad.violation.has_value());
    CHECK(bad.violation->radius == doctest::Approx(0.5));
    CHECK(bad.violation->mass == doctest::Approx(-1.0));
}

TEST_CASE("semi-selfdecomposability verdicts") {
    const auto grid = axis_grid(1, 5.0, 41);
    for (double b : {1.1, 2.0, 10.0}) {
        const auto c = is_semi_selfdecomposable(LevyTriplet::gaussian(Mat::Constant(1, 1, 2.0)), SpanConfig(b), grid);
        CHECK(c.verdict());
        CHECK(c.residual < 1e-12);
    }
    const auto cp = is_semi_selfdecomposable(cp1(), SpanConfig(2.0), grid);
    CHECK_FALSE(cp.verdict());
    CHECK(cp.violation_level == 0);
    CHECK(cp.clipped_residual > 0.1);

    // semi-stable lattice, alpha = 1: nu - nu(2.) = nu / 2
    auto ss = LevyTriplet::zero(1);
    ss.nu.add_lattice(v1(1.0), 2.0, 1.0, LatticeMass::geometric(1.0, 0.5));
    const auto cert = is_semi_selfdecomposable(ss, SpanConfig(2.0), grid);
    CHECK(cert.verdict());
    const auto& rho = cert.factors.front();
    REQUIRE(rho.nu.lattices.size() == 1);
    for (std::int64_t k = -20; k <= 20; ++k)
        CHECK(rho.nu.lattices[0].mass.at(k) == doctest::Approx(0.5 * std::pow(0.5, static_cast<double>(k))));
}

TEST_CASE("adding proportional mass keeps a valid verdict") {
    auto ss = LevyTriplet::zero(1);
    ss.nu.add_lattice(v1(1.0), 2.0, 1.0, LatticeMass::geometric(1.0, std::pow(2.0, -1.5)));
    for (double c : {1.0, 2.0, 10.0}) {
        auto more = ss;
        more.nu.add_lattice(v1(1.0), 2.0, 1.0, LatticeMass::geometric(c, std::pow(2.0, -1.5)));
        CHECK(phi_inverse(more, SpanConfig(2.0)).valid);
    }
}

TEST_CASE("factorization_check") {
    const SpanConfig cfg(2.0);
    const auto grid = axis_grid(1, 5.0, 21);
    for (const auto& rho : corpus(1, 2.0)) {
        const auto mu = phi_forward_triplet(rho, cfg);
        const auto rep = factorization_check(mu, rho, cfg, grid);
        CHECK(rep.max_residual <= 1e-10);
        CHECK(rep.residuals.front() == 0.0);  // the origin comes first
        auto wrong = rho;
        wrong.gamma[0] += 1.0;
        CHECK(factorization_check(mu, wrong, cfg, grid).max_residual >= 4.9);
    }
    CHECK_THROWS_AS(factorization_check(cp1(), cp1(), cfg, {}), InvalidArgument);
}

TEST_CASE("injectivity probe") {
    const SpanConfig cfg(2.0);
    const auto grid = axis_grid(1, 1.0, 3);  // -1, 0, 1
    const auto g1 = LevyTriplet::gaussian(Mat::Identity(1, 1));
    const auto g2 = LevyTriplet::gaussian(Mat::Constant(1, 1, 2.0));
    auto same = injectivity_probe(g1, g1, cfg, grid);
    CHECK(same.forward_gap == 0.0);
    CHECK(same.input_gap == 0.0);
    auto gap = injectivity_probe(g1, g2, cfg, grid);
    CHECK(gap.forward_gap == doctest::Approx(2.0 / 3.0));
    CHECK(gap.input_gap == doctest::Approx(0.5));
    auto cp = injectivity_probe(cp1(1.0), cp1(2.0), cfg, axis_grid(1, 5.0, 21));
    CHECK(cp.input_gap > 0.0);
    CHECK(cp.forward_gap > 0.0);
}

TEST_CASE("classical selfdecomposable map") {
    Mat A0(2, 2);
    A0 << 2.0, 0.4, 0.4, 1.0;
    const Vec z = v2(0.8, -1.3);
    auto c = classic_L_map_cumulant(LevyTriplet::gaussian(A0), z);
    CHECK(std::abs(c.value - C(-0.25 * z.dot(A0 * z), 0.0)) < 1e-9);
    CHECK(classic_L_map_cumulant(LevyTriplet::gaussian(A0), v2(0, 0)).value == C(0, 0));
    auto drift = LevyTriplet::zero(1);
    drift.gamma = v1(1.7);
    auto d = classic_L_map_cumulant(drift, v1(2.0));
    CHECK(std::abs(d.value - C(0.0, 3.4)) < 1e-9);
}

TEST_CASE("k-function difference measures") {
    const SpanConfig cfg(2.0);
    KFunction kexp{{{v1(1.0), 1.0, KShape::exp(1.0, 1.0)}}};
    const auto nu = k_function_to_nu_b(kexp, cfg);
    REQUIRE(nu.radials.size() == 1);
    for (double r : {0.01, 0.5, 1.0, 3.0, 20.0}) {
        CHECK(nu.radials[0].h(r) >= 0.0);
        CHECK(nu.radials[0].h(r) == doctest::Approx((std::exp(-r) - std::exp(-2.0 * r)) / r));
    }
    KFunction ind{{{v1(1.0), 1.0, KShape::indicator(1.0)}}};
    const auto nb = k_function_to_nu_b(ind, cfg);
    REQUIRE(nb.radials.size() == 1);
    CHECK(nb.radials[0].h(0.49) == 0.0);
    CHECK(nb.radials[0].h(0.5) == doctest::Approx(2.0));
    CHECK(nb.radials[0].h(0.8) == doctest::Approx(1.25));
    CHECK(nb.radials[0].h(1.0) == 0.0);
    CHECK(nb.radials[0].h(3.0) == 0.0);

    KFunction flat{{{v1(1.0), 1.0, KShape::constant(2.0)}}};
    CHECK(k_function_to_nu_b(flat, cfg).empty());

    KFunction rising{{{v1(1.0), 1.0, KShape::steps({1.0}, {0.0, 1.0})}}};
    CHECK_THROWS_AS(k_function_to_nu_b(rising, cfg), InvalidArgument);
}

TEST_CASE("k-function route agrees with the classical map") {
    // k(r) = e^{-r} on one ray. mu0 has nu(dr) = -dk = e^{-r} dr, its classical image and
    // Phi_b of the rho built from k both carry nu(dr) = k(r)/r dr = e^{-r}/r dr.
    // Drifts are not compared, so the differences must be linear in z.
    const SpanConfig cfg(2.0);
    KFunction k{{{v1(1.0), 1.0, KShape::exp(1.0, 1.0)}}};
    auto rho = LevyTriplet::zero(1);
    rho.nu = k_function_to_nu_b(k, cfg);
    auto mu0 = LevyTriplet::zero(1);
    mu0.nu.add_radial(RadialDensity{v1(1.0), TemperedStable{1.0, -1.0, 1.0}});
    auto mu = LevyTriplet::zero(1);
    mu.nu.add_radial(RadialDensity{v1(1.0), TemperedStable{1.0, 0.0, 1.0}});

    std::vector<double> slope_phi, slope_l;
    for (double z : {0.5, 1.0, 2.0, 4.0}) {
        const C c = cumulant(mu, v1(z), 1e-10).value;
        const C f = phi_forward_cumulant(rho, cfg, v1(z), 1e-9).value;
        const C l = classic_L_map_cumulant(mu0, v1(z), 1e-8).value;
        CHECK(std::abs(f.real() - c.real()) < 1e-8);
        CHECK(std::abs(l.real() - c.real()) < 1e-7);
        slope_phi.push_back((f.imag() - c.imag()) / z);
        slope_l.push_back((l.imag() - c.imag()) / z);
    }
    for (std::size_t i = 1; i < slope_phi.size(); ++i) {
        CHECK(slope_phi[i] == doctest::Approx(slope_phi[0]).epsilon(1e-7));
        CHECK(slope_l[i] == doctest::Approx(slope_l[0]).epsilon(1e-6));
    }
}

TEST_CASE("period function") {
    const SpanConfig b4(4.0);
    CHECK(period_function(b4, 0.0) == 1.0);
    CHECK(period_function(b4, std::log(4.0)) == doctest::Approx(1.0));
    CHECK(period_function(b4, 0.5 * std::log(4.0)) == doctest::Approx(2.0));
    for (double b : {1.1, 2.0, 10.0}) {
        const SpanConfig cfg(b);
        const double lb = std::log(b);
        double worst = 0.0;
        for (int i = 0; i <= 5000; ++i) {
            const double t = 5.0 * lb * i / 5000.0;
            const double g = period_function(cfg, t);
            CHECK(g >= 1.0);
            CHECK(g < b);
            const double n = std::floor(t / lb);
            worst = std::max(worst, std::abs(std::exp(-t) * g - std::pow(b, -n)));
        }
        CHECK(worst <= 1e-12);
    }
    CHECK_THROWS_AS(period_function(b4, -1.0), InvalidArgument);
}
