#include "ssd/verify.hpp"
#include "ssd/grid.hpp"
#include "ssd/iterate.hpp"
#include "ssd/ou_sim.hpp"
#include "ssd/skeleton.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace ssd {

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

LevyTriplet cp1() { return LevyTriplet::compound_poisson({Atom{v1(1.0), 1.0}}); }
LevyTriplet gauss1() { return LevyTriplet::gaussian(Mat::Identity(1, 1)); }

LevyTriplet power_lattice(double p) {
    auto t = LevyTriplet::zero(1);
    t.nu.add_lattice(v1(1.0), 10.0, 1.0, LatticeMass::power(1.0, p, 1));
    return t;
}

std::string num_tag(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

OUConfig ou_config(double b, double c, double T, OUInit init = OUInit::constant(v1(0.0))) {
    OUConfig cfg;
    cfg.b = b;
    cfg.c = c;
    cfg.T = T;
    cfg.init = std::move(init);
    return cfg;
}

class Recorder {
public:
    Recorder(std::string suite, SuiteResult& out) : suite_(std::move(suite)), out_(out) {}

    // value <= limit
    void at_most(const std::string& name, const std::function<double()>& f, double limit) {
        run(name, "<=", limit, f, [](double v, double l) { return v <= l; });
    }
    void above(const std::string& name, const std::function<double()>& f, double limit) {
        run(name, ">", limit, f, [](double v, double l) { return v > l; });
    }
    void holds(const std::string& name, const std::function<bool()>& f) {
        run(name, "==", 1.0, [&] { return f() ? 1.0 : 0.0; }, [](double v, double) { return v == 1.0; });
    }
    template <class E>
    void throws(const std::string& name, const std::function<void()>& f) {
        CheckResult r{suite_, name, 0.0, 1.0, "==", false, ""};
        try {
            f();
            r.note = "no exception";
        } catch (const E& e) {
            r.value = 1.0;
            r.pass = true;
            r.note = e.what();
        } catch (const std::exception& e) {
            r.note = std::string("wrong exception: ") + e.what();
        }
        out_.checks.push_back(std::move(r));
    }

private:
    template <class Cmp>
    void run(const std::string& name, const char* rel, double limit, const std::function<double()>& f, Cmp cmp) {
        CheckResult r{suite_, name, 0.0, limit, rel, false, ""};
        try {
            r.value = f();
            r.pass = std::isfinite(r.value) && cmp(r.value, limit);
        } catch (const std::exception& e) {
            r.value = std::nan("");
            r.note = e.what();
        }
        out_.checks.push_back(std::move(r));
    }

    std::string suite_;
    SuiteResult& out_;
};

void core_suite(SuiteResult& out) {
    Recorder rec("core", out);
    for (int d : {1, 2})
        for (double b : {1.1, 2.0, 10.0}) {
            const SpanConfig cfg(b);
            const auto corpus = reference_corpus(d, b);
            const char* names[] = {"gaussian", "compound_poisson", "lattice"};
            for (std::size_t i = 0; i < corpus.size(); ++i) {
                const auto& rho = corpus[i];
                const std::string tag = std::string(names[i]) + " d=" + std::to_string(d) + " b=" + num_tag(b);
                rec.at_most("factorization " + tag, [&] {
                    double worst = 0.0;
                    for (const auto& z : axis_grid(d, 5.0, 21)) {
                        const auto a = phi_forward_cumulant(rho, cfg, z, 1e-10).value;
                        const auto c = phi_forward_cumulant(rho, cfg, Vec(z / b), 1e-10).value;
                        worst = std::max(worst, std::abs(a - c - cumulant(rho, z).value));
                    }
                    return worst;
                }, 1e-8);
                rec.at_most("roundtrip " + tag, [&] {
                    const auto inv = phi_inverse(phi_forward_triplet(rho, cfg), cfg);
                    if (!inv.valid) return kInf;
                    return std::max({(inv.rho.A - rho.A).norm() / std::max(1.0, rho.A.norm()),
                                     (inv.rho.gamma - rho.gamma).norm(), measure_distance(rho.nu, inv.rho.nu, b)});
                }, 1e-10);
            }
            rec.at_most("gaussian forward variance d=" + std::to_string(d) + " b=" + num_tag(b), [&] {
                const Mat A = Mat::Identity(d, d) * 1.5;
                const Mat want = A / (1.0 - 1.0 / (b * b));
                return (phi_forward_triplet(LevyTriplet::gaussian(A), cfg).A - want).norm() / want.norm();
            }, 4e-16);
        }
    rec.holds("inverse of CP(delta_1) is not a Levy triplet", [] { return !phi_inverse(cp1(), SpanConfig(2.0)).valid; });
    rec.throws<DomainError>("k^-2 lattice rejected by the forward map",
                            [] { weighted_series_cumulant(power_lattice(2.0), 10.0, 0, v1(1.0), 1e-2); });
    rec.at_most("k^-3 lattice accepted at m=0", [] {
        return weighted_series_cumulant(power_lattice(3.0), 10.0, 0, v1(1.0), 1e-2).err;
    }, 1e-2);
    rec.throws<DomainError>("k^-3 lattice rejected at m=1",
                            [] { weighted_series_cumulant(power_lattice(3.0), 10.0, 1, v1(1.0), 1e-2); });
}

void ou_suite(SuiteResult& out, std::uint64_t seed) {
    Recorder rec("ou", out);
    const std::size_t n = 20000;
    const auto grid = axis_grid(1, 3.0, 21);
    rec.at_most("langevin identity, 20 paths x 200 epochs", [&] {
        double worst = 0.0;
        for (std::uint64_t p = 0; p < 20; ++p) {
            const auto noise = p % 2 ? cp1() : gauss1();
            const double c = 1.0 + static_cast<double>(p % 3);
            const auto cfg = ou_config(2.0, c, 200.0 / c, OUInit::constant(v1(0.5)));
            worst = std::max(worst, verify_langevin(simulate_path(noise, cfg, mix_seed(seed, 100 + p))).max_rel);
        }
        return worst;
    }, 1e-10);
    const char* names[] = {"gaussian", "cp"};
    int i = 0;
    for (const auto& noise : {gauss1(), cp1()}) {
        const std::string tag = names[i++];
        rec.holds("limit law, two initial states, " + tag, [&] {
            return validate_limit(noise, ou_config(2.0, 1.0, 1.0), OUInit::constant(v1(4.0)), OUInit::from_law(cp1()), n,
                                  40, grid, mix_seed(seed, 200 + i))
                .pass;
        });
    }
    rec.holds("limit-law init is stationary", [&] {
        return stationarity_check(cp1(), ou_config(2.0, 2.0, 1.0), n, {0, 1, 3, 7, 12}, grid, mix_seed(seed, 300)).pass;
    });
    rec.holds("one-epoch increments of CP(delta_1) stay below e^-2", [&] {
        return divergence_diagnostic(cp1(), ou_config(2.0, 1.0, 1.0), v1(M_PI), {10.0, 20.0, 40.0}, n,
                                     mix_seed(seed, 400))
            .pass;
    });
    rec.holds("semi-stationary shift by 1/c", [&] {
        return semistationary_path(cp1(), ou_config(2.0, 1.0, 1.0), 0, 2.0, n, mix_seed(seed, 500)).report.within_radius;
    });
    rec.above("half-period shift exceeds the radius", [&] {
        const auto r = shift_invariance(cp1(), ou_config(2.0, 1.0, 1.0), {}, {{0.0, 0.5}}, 0.5, {},
                                        axis_diagonal_grid(2, 3.0, 11), n, mix_seed(seed, 600));
        return r.max_pair_gap / (2.0 * r.radius);
    }, 1.0);
}

void iterate_suite(SuiteResult& out) {
    Recorder rec("iterate", out);
    rec.holds("f_m(k) = C(k+m, m+1) for k <= 50, m <= 6", [] {
        for (int m = 0; m <= 6; ++m)
            for (std::int64_t k = 0; k <= 50; ++k) {
                const auto want = binomial(k + m, m + 1);
                if (f_m_at(k, m) != want || f_m(static_cast<double>(k), m) != static_cast<double>(want)) return false;
            }
        return true;
    });
    rec.at_most("f_m_star inverts f_m", [] {
        double worst = 0.0;
        for (int m = 0; m <= 6; ++m)
            for (double u = 0.0; u <= 40.0; u += 0.37) {
                const double f = f_m(u, m);
                worst = std::max(worst, std::abs(f_m_star(f, m) - u) / std::max(1.0, u));
            }
        return worst;
    }, 1e-12);
    rec.holds("binomial identity for n <= 60", [] {
        for (std::int64_t n = 0; n <= 60; ++n)
            for (std::int64_t k = 0; k <= n; ++k)
                if (!binom_identity_check(n, k)) return false;
        return true;
    });
    rec.at_most("Gaussian m=1 b=2 z=1 equals -8/9", [] {
        return std::abs(phi_iter_cumulant(gauss1(), IterConfig(2.0, 1), v1(1.0)).value - Complex(-8.0 / 9.0, 0.0));
    }, 1e-10);
    rec.at_most("m=1 series equals the composed forward map", [] {
        const SpanConfig cfg(2.0);
        const auto twice = phi_forward_triplet(phi_forward_triplet(cp1(), cfg), cfg);
        double worst = 0.0;
        for (const auto& z : axis_grid(1, 5.0, 21))
            worst = std::max(worst, std::abs(phi_iter_cumulant(cp1(), IterConfig(2.0, 1), z).value - cumulant(twice, z).value));
        return worst;
    }, 5e-8);
    const auto grid = axis_grid(1, 5.0, 21);
    for (double alpha : {0.5, 1.0, 1.5}) {
        rec.holds("semi-stable alpha=" + num_tag(alpha) + " in L_5 with proportional factors", [&] {
            SemiStableSpec s;
            s.b = 2.0;
            s.alpha = alpha;
            s.directions = {{v1(1.0), 1.0}};
            const auto ss = semi_stable_triplet(s);
            const auto cert = is_Lm_member(ss, IterConfig(2.0, 5), grid);
            if (!cert.verdict() || cert.factors.size() != 6) return false;
            const double f = 1.0 - std::pow(2.0, -alpha);
            for (std::size_t j = 0; j < cert.factors.size(); ++j) {
                if (cert.factors[j].nu.lattices.size() != 1) return false;
                const auto& m = cert.factors[j].nu.lattices[0].mass;
                for (std::int64_t k = -30; k <= 30; ++k) {
                    const double want = std::pow(f, j + 1.0) * ss.nu.lattices[0].mass.at(k);
                    if (std::abs(m.at(k) - want) > 1e-12 * want) return false;
                }
            }
            return true;
        });
    }
    rec.holds("CP(delta_1) fails level 0", [&] { return is_Lm_member(cp1(), IterConfig(2.0, 0), grid).violation_level == 0; });
    rec.holds("Phi_2(CP(delta_1)) passes level 0 and fails level 1", [&] {
        const auto c = is_Lm_member(phi_forward_triplet(cp1(), SpanConfig(2.0)), IterConfig(2.0, 1), grid);
        return c.levels == std::vector<bool>{true, false};
    });
}

}  // namespace

std::vector<LevyTriplet> reference_corpus(int d, double b) {
    if (d != 1 && d != 2) throw InvalidArgument("reference corpus exists for d = 1, 2");
    std::vector<LevyTriplet> out;
    // mass 1 for k <= 0 and q^k above; q <= 1/b keeps the phases z x below 1e16
    auto lattice = [&](const Vec& dir) {
        auto t = LevyTriplet::zero(d);
        t.nu.add_lattice(dir, b, 1.0,
                         LatticeMass::geometric(1.0, 1.0, kIndexMin, 0) + LatticeMass::geometric(1.0, std::min(0.5, 1.0 / b), 1));
        t.gamma = Vec::Constant(d, 0.25);
        return t;
    };
    if (d == 1) {
        out.push_back(LevyTriplet::gaussian(Mat::Constant(1, 1, 1.5)));
        auto cp = LevyTriplet::compound_poisson({{v1(1.0), 1.0}, {v1(-3.0), 0.5}, {v1(0.2), 2.0}});
        cp.gamma[0] += 0.3;
        out.push_back(cp);
        out.push_back(lattice(v1(1.0)));
    } else {
        Mat A(2, 2);
        A << 2.0, 0.5, 0.5, 1.0;
        out.push_back(LevyTriplet::gaussian(A));
        out.push_back(LevyTriplet::compound_poisson({{v2(1.0, 0.0), 1.0}, {v2(-0.5, 2.0), 0.7}}));
        out.push_back(lattice(v2(0.6, 0.8)));
    }
    return out;
}

bool SuiteResult::pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return !checks.empty();
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
    SuiteResult out;
    const bool all = name == "all";
    if (!all && name != "core" && name != "ou" && name != "iterate") throw InvalidArgument("unknown suite '" + name + "'");
    if (all || name == "core") core_suite(out);
    if (all || name == "iterate") iterate_suite(out);
    if (all || name == "ou") ou_suite(out, seed);
    return out;
}

}  // namespace ssd
