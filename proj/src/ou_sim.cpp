#include "ssd/ou_sim.hpp"
#include "ssd/grid.hpp"
#include "ssd/parallel.hpp"
#include "ssd/phi_map.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace ssd {

void OUConfig::validate() const {
    SpanConfig check(b);
    (void)check;
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("epoch rate c must be > 0");
    if (!std::isfinite(t0) || !std::isfinite(T) || !(T >= t0)) throw InvalidArgument("need T >= t0");
    if (init.kind == OUInit::Kind::Law && !init.law) throw InvalidArgument("init law missing");
}

std::int64_t OUConfig::epoch(double t) const {
    const double x = c * t;
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::int64_t>(r);
    return static_cast<std::int64_t>(std::floor(x));
}

const Vec& OUPath::at(double t) const {
    const double x = c * t;
    const double r = std::round(x);
    const auto k = std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x)) ? static_cast<std::int64_t>(r)
                                                                         : static_cast<std::int64_t>(std::floor(x));
    if (k < k0) throw InvalidArgument("time before the initial epoch");
    return states[static_cast<std::size_t>(std::min(k, k1()) - k0)];
}

OUPath solve_path(const std::vector<Vec>& increments, const OUConfig& cfg, const Vec& M) {
    cfg.validate();
    const auto k0 = cfg.first_epoch();
    const auto n = cfg.last_epoch() - k0;
    if (static_cast<std::int64_t>(increments.size()) != n) throw InvalidArgument("missing increments");
    OUPath p;
    p.b = cfg.b;
    p.c = cfg.c;
    p.k0 = k0;
    p.increments = increments;
    p.states.reserve(static_cast<std::size_t>(n) + 1);
    p.states.push_back(M);
    for (const auto& dx : increments) {
        if (dx.size() != M.size()) throw InvalidArgument("increment has wrong dimension");
        p.states.push_back((p.states.back() + dx) / cfg.b);
    }
    return p;
}

Vec closed_form_state(const OUPath& p, std::int64_t k) {
    if (k < p.k0 || k > p.k1()) throw InvalidArgument("epoch outside the path");
    // b^{-(k-k0)} M + sum_{l=k0+1}^{k} b^{l-1-k} dX_l
    Vec z = std::pow(p.b, -static_cast<double>(k - p.k0)) * p.M();
    for (std::int64_t l = p.k0 + 1; l <= k; ++l)
        z += std::pow(p.b, static_cast<double>(l - 1 - k)) * p.increments[static_cast<std::size_t>(l - p.k0 - 1)];
    return z;
}

LangevinReport verify_langevin(const OUPath& p) {
    LangevinReport rep;
    const Vec& M = p.M();
    Vec X = Vec::Zero(M.size());      // X_t - X_{t0}
    Vec S = Vec::Zero(M.size());      // sum of Z over epochs in (t0, t]
    double scale = M.norm();
    for (std::size_t i = 0; i < p.states.size(); ++i) {
        const Vec& Z = p.states[i];
        if (i > 0) {
            X += p.increments[i - 1];
            S += Z;
        }
        scale = std::max({scale, Z.norm(), X.norm(), (p.b - 1.0) * S.norm()});
        const double r = (Z - M - X + (p.b - 1.0) * S).norm();
        if (r > rep.max_abs) {
            rep.max_abs = r;
            rep.worst_epoch = p.k0 + static_cast<std::int64_t>(i);
        }
    }
    rep.max_rel = rep.max_abs / std::max(1.0, scale);
    return rep;
}

Bounded<Complex> limit_cumulant(const LevyTriplet& noise, const OUConfig& cfg, const Vec& z, double tol) {
    cfg.validate();
    const auto f = phi_forward_cumulant(noise, SpanConfig(cfg.b), Vec(z / cfg.b), tol * cfg.c);
    return {f.value / cfg.c, f.err / cfg.c};
}

Complex transition_cumulant(const LevyTriplet& noise, const OUConfig& cfg, double s, double t, const Vec& x,
                            const Vec& z, double tol) {
    cfg.validate();
    if (s > t) throw InvalidArgument("transition needs s <= t");
    const auto n = cfg.epoch(t) - cfg.epoch(s);
    Complex acc(0.0, z.dot(std::pow(cfg.b, -static_cast<double>(n)) * x));
    double scale = 1.0 / cfg.b;
    for (std::int64_t k = 0; k < n; ++k) {
        acc += cumulant(noise, Vec(scale * z), tol).value / cfg.c;
        scale /= cfg.b;
    }
    return acc;
}

namespace {

std::vector<Vec> probes(int d, double zmax) {
    std::vector<Vec> out;
    for (const auto& p : axis_diagonal_grid(d, zmax, 3))
        if (p.norm() > 0.0) out.push_back(p);
    return out;
}

// sup over probes of (1/c) |sum_{k>=K} C(b^{-k-1} z)| including its error bound
double tail_bound(const LevyTriplet& noise, const OUConfig& cfg, const std::vector<Vec>& ps, int K) {
    double worst = 0.0;
    const double s = std::pow(cfg.b, -static_cast<double>(K) - 1.0);
    for (const auto& p : ps) {
        const auto f = phi_forward_cumulant(noise, SpanConfig(cfg.b), Vec(s * p), 1e-12);
        worst = std::max(worst, (std::abs(f.value) + f.err) / cfg.c);
    }
    return worst;
}

double init_bias(const OUInit& init, const Vec& z, double factor) {
    switch (init.kind) {
        case OUInit::Kind::Constant: return std::abs(1.0 - std::exp(Complex(0.0, factor * z.dot(init.value))));
        case OUInit::Kind::Law: return std::abs(1.0 - std::exp(cumulant(*init.law, Vec(factor * z)).value));
        case OUInit::Kind::Limit: return 0.0;
    }
    return 0.0;
}

double grid_max_norm(const std::vector<Vec>& grid) {
    double m = 0.0;
    for (const auto& z : grid) m = std::max(m, z.norm());
    return m;
}

}  // namespace

LimitTruncation limit_truncation(const LevyTriplet& noise, const OUConfig& cfg, double zmax, double tol) {
    cfg.validate();
    LimitTruncation out;
    const auto ps = probes(noise.dim(), zmax);
    for (int K = 0; K <= 4000; ++K) {
        const double t = tail_bound(noise, cfg, ps, K);
        if (t <= tol) {
            out.K = K;
            out.bound = t;
            return out;
        }
    }
    throw ToleranceError("limit-law truncation does not reach the tolerance", tail_bound(noise, cfg, ps, 4000));
}

StateSamples simulate_states(const LevyTriplet& noise, const OUConfig& cfg, std::size_t n,
                             std::vector<std::int64_t> record, std::uint64_t seed, double zmax) {
    cfg.validate();
    if (n < 1) throw InvalidArgument("need at least one path");
    const int d = noise.dim();
    if (cfg.init.kind == OUInit::Kind::Constant && cfg.init.value.size() != d)
        throw InvalidArgument("initial state has wrong dimension");
    if (cfg.init.kind == OUInit::Kind::Law && cfg.init.law->dim() != d)
        throw InvalidArgument("initial law has wrong dimension");
    for (auto r : record)
        if (r < 0) throw InvalidArgument("record offsets must be >= 0");

    StateSamples out;
    out.offsets = record;
    const IncrementSampler inc(noise, 1.0 / cfg.c);
    out.noise_info = inc.info();
    std::optional<IncrementSampler> init_law;
    if (cfg.init.kind == OUInit::Kind::Law) init_law.emplace(*cfg.init.law, 1.0);
    if (cfg.init.kind == OUInit::Kind::Limit) out.truncation = limit_truncation(noise, cfg, zmax);
    const int warm = out.truncation.K;

    std::int64_t last = 0;
    for (auto r : record) last = std::max(last, r);
    out.states.assign(record.size(), Mat::Zero(d, static_cast<Eigen::Index>(n)));
    const double binv = 1.0 / cfg.b;
    const std::size_t blocks = (n + kSampleBlock - 1) / kSampleBlock;
    parallel_for(blocks, [&](std::size_t blk) {
        RngStream rng(seed, blk);
        Vec z(d), dx(d);
        const std::size_t end = std::min(n, (blk + 1) * kSampleBlock);
        for (std::size_t j = blk * kSampleBlock; j < end; ++j) {
            const auto col = static_cast<Eigen::Index>(j);
            z.setZero();
            switch (cfg.init.kind) {
                case OUInit::Kind::Constant: z = cfg.init.value; break;
                case OUInit::Kind::Law: init_law->add_draw(rng, z.data()); break;
                case OUInit::Kind::Limit:
                    for (int k = 0; k < warm; ++k) {
                        dx.setZero();
                        inc.add_draw(rng, dx.data());
                        z = (z + dx) * binv;
                    }
                    break;
            }
            for (std::int64_t k = 0; k <= last; ++k) {
                if (k > 0) {
                    dx.setZero();
                    inc.add_draw(rng, dx.data());
                    z = (z + dx) * binv;
                }
                for (std::size_t i = 0; i < record.size(); ++i)
                    if (record[i] == k) out.states[i].col(col) = z;
            }
        }
    });
    return out;
}

OUPath simulate_path(const LevyTriplet& noise, const OUConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const auto n = cfg.last_epoch() - cfg.first_epoch();
    const IncrementSampler inc(noise, 1.0 / cfg.c);
    RngStream rng(seed, 0);
    Vec M = Vec::Zero(noise.dim());
    switch (cfg.init.kind) {
        case OUInit::Kind::Constant: M = cfg.init.value; break;
        case OUInit::Kind::Law: IncrementSampler(*cfg.init.law, 1.0).add_draw(rng, M.data()); break;
        case OUInit::Kind::Limit: {
            const auto tr = limit_truncation(noise, cfg, 5.0);
            for (int k = 0; k < tr.K; ++k) M = (M + inc.draw(rng)) / cfg.b;
            break;
        }
    }
    std::vector<Vec> dx;
    dx.reserve(static_cast<std::size_t>(n));
    for (std::int64_t k = 0; k < n; ++k) dx.push_back(inc.draw(rng));
    auto p = solve_path(dx, cfg, M);
    p.seed = seed;
    return p;
}

LimitReport validate_limit(const LevyTriplet& noise, const OUConfig& cfg, const OUInit& first,
                           const OUInit& second, std::size_t n, int steps, const std::vector<Vec>& grid,
                           std::uint64_t seed) {
    if (steps < 0) throw InvalidArgument("steps must be >= 0");
    if (n < 2) throw InvalidArgument("need at least two paths");
    LimitReport rep;
    const double zmax = std::max(grid_max_norm(grid), 1e-3);
    auto run = [&](const OUInit& init, std::uint64_t s) {
        OUConfig c2 = cfg;
        c2.init = init;
        auto st = simulate_states(noise, c2, n, {steps}, s, zmax);
        return std::make_pair(ecf(st.states[0], grid), st.truncation.bound);
    };
    const auto [e1, tb1] = run(first, seed);
    const auto [e2, tb2] = run(second, mix_seed(seed, 1));
    rep.radius = e1.radius;
    const double factor = std::pow(cfg.b, -static_cast<double>(steps));
    OUConfig base = cfg;
    const auto ps = probes(noise.dim(), zmax);
    // cumulant tail beyond `steps`, shared by every grid point through the probe bound
    const double tail = steps == 0 && first.kind != OUInit::Kind::Limit ? 0.0 : tail_bound(noise, base, ps, steps);
    bool ok = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& z = grid[i];
        const Complex target = std::exp(limit_cumulant(noise, cfg, z).value);
        const double b1 = tail + init_bias(first, z, factor) + tb1;
        const double b2 = tail + init_bias(second, z, factor) + tb2;
        const double d1 = std::abs(e1.values[i] - target);
        const double d2 = std::abs(e2.values[i] - target);
        rep.dev_first.push_back(d1);
        rep.dev_second.push_back(d2);
        rep.max_dev_first = std::max(rep.max_dev_first, d1);
        rep.max_dev_second = std::max(rep.max_dev_second, d2);
        rep.max_init_gap = std::max(rep.max_init_gap, std::abs(e1.values[i] - e2.values[i]));
        rep.bias = std::max({rep.bias, b1, b2});
        ok = ok && d1 <= rep.radius + b1 && d2 <= rep.radius + b2 &&
             std::abs(e1.values[i] - e2.values[i]) <= 2.0 * rep.radius + b1 + b2;
    }
    rep.pass = ok;
    return rep;
}

StationarityReport stationarity_check(const LevyTriplet& noise, const OUConfig& cfg, std::size_t n,
                                      const std::vector<int>& epochs, const std::vector<Vec>& grid,
                                      std::uint64_t seed) {
    OUConfig c2 = cfg;
    c2.init = OUInit::limit();
    std::vector<std::int64_t> rec(epochs.begin(), epochs.end());
    const auto st = simulate_states(noise, c2, n, rec, seed, std::max(grid_max_norm(grid), 1e-3));
    StationarityReport rep;
    rep.epochs = epochs;
    rep.bias = st.truncation.bound;
    rep.pass = true;
    std::vector<Complex> target;
    for (const auto& z : grid) target.push_back(std::exp(limit_cumulant(noise, cfg, z).value));
    for (std::size_t e = 0; e < epochs.size(); ++e) {
        const auto r = ecf(st.states[e], grid);
        rep.radius = r.radius;
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, std::abs(r.values[i] - target[i]));
        rep.max_dev.push_back(worst);
        rep.pass = rep.pass && worst <= rep.radius + rep.bias;
    }
    return rep;
}

namespace {

Mat stack(const Mat& a, const Mat& b) {
    Mat out(a.rows() + b.rows(), a.cols());
    out << a, b;
    return out;
}

double max_gap(const EcfResult& a, const EcfResult& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

std::vector<Vec> default_pair_grid(int d) {
    return d == 1 ? axis_diagonal_grid(2, 3.0, 11) : axis_grid(2 * d, 3.0, 11);
}

}  // namespace

ShiftReport shift_invariance(const LevyTriplet& noise, const OUConfig& cfg, const std::vector<double>& times,
                             const std::vector<std::pair<double, double>>& pairs, double shift,
                             const std::vector<Vec>& grid1, const std::vector<Vec>& grid2, std::size_t n,
                             std::uint64_t seed) {
    cfg.validate();
    std::vector<std::int64_t> rec;
    auto slot = [&](double t) {
        if (t < 0.0) throw InvalidArgument("times must be >= 0");
        const auto e = cfg.epoch(t);
        auto it = std::find(rec.begin(), rec.end(), e);
        if (it != rec.end()) return static_cast<std::size_t>(it - rec.begin());
        rec.push_back(e);
        return rec.size() - 1;
    };
    std::vector<std::pair<std::size_t, std::size_t>> marg;
    for (double t : times) marg.emplace_back(slot(t), slot(t + shift));
    std::vector<std::array<std::size_t, 4>> pr;
    for (const auto& [s, t] : pairs) pr.push_back({slot(s), slot(t), slot(s + shift), slot(t + shift)});

    OUConfig c2 = cfg;
    c2.init = OUInit::limit();
    const double zmax = std::max({grid_max_norm(grid1), grid_max_norm(grid2), 1e-3});
    const auto st = simulate_states(noise, c2, n, rec, seed, zmax);
    ShiftReport rep;
    rep.shift = shift;
    rep.radius = Tolerances::mc_multiplier / std::sqrt(static_cast<double>(n));
    for (const auto& [a, b] : marg)
        rep.max_marginal_gap = std::max(rep.max_marginal_gap, max_gap(ecf(st.states[a], grid1), ecf(st.states[b], grid1)));
    for (const auto& p : pr) {
        const auto e1 = ecf(stack(st.states[p[0]], st.states[p[1]]), grid2);
        const auto e2 = ecf(stack(st.states[p[2]], st.states[p[3]]), grid2);
        rep.max_pair_gap = std::max(rep.max_pair_gap, max_gap(e1, e2));
    }
    rep.within_radius = rep.max_marginal_gap <= 2.0 * rep.radius && rep.max_pair_gap <= 2.0 * rep.radius;
    return rep;
}

SemiStationaryResult semistationary_path(const LevyTriplet& noise, const OUConfig& cfg, int warmup, double horizon,
                                         std::size_t n, std::uint64_t seed) {
    cfg.validate();
    if (!(horizon >= 0.0)) throw InvalidArgument("horizon must be >= 0");
    const int d = noise.dim();
    const auto grid1 = axis_grid(d, 3.0, 21);
    const auto grid2 = default_pair_grid(d);
    const auto last = cfg.epoch(horizon);
    std::vector<std::int64_t> rec;
    for (std::int64_t k = 0; k <= last + 2; ++k) rec.push_back(k);

    SemiStationaryResult out;
    OUConfig c2 = cfg;
    c2.init = OUInit::limit();
    StateSamples st;
    if (warmup > 0) {
        // explicit K: check it against the truncation tolerance first
        const auto need = limit_truncation(noise, cfg, 3.0);
        if (warmup < need.K) throw ToleranceError("warmup too short for the truncation tolerance", need.bound);
        c2.init = OUInit::constant(Vec::Zero(d));
        std::vector<std::int64_t> shifted;
        for (auto k : rec) shifted.push_back(k + warmup);
        st = simulate_states(noise, c2, n, shifted, seed, 3.0);
        st.truncation = LimitTruncation{warmup, tail_bound(noise, cfg, probes(d, 3.0), warmup)};
    } else {
        st = simulate_states(noise, c2, n, rec, seed, 3.0);
    }
    out.truncation = st.truncation;
    out.report.shift = 1.0 / cfg.c;
    out.report.radius = Tolerances::mc_multiplier / std::sqrt(static_cast<double>(n));
    for (std::int64_t k = 0; k + 1 <= last + 1; ++k) {
        const auto i = static_cast<std::size_t>(k);
        out.report.max_marginal_gap =
            std::max(out.report.max_marginal_gap, max_gap(ecf(st.states[i], grid1), ecf(st.states[i + 1], grid1)));
        const auto e1 = ecf(stack(st.states[i], st.states[i + 1]), grid2);
        const auto e2 = ecf(stack(st.states[i + 1], st.states[i + 2]), grid2);
        out.report.max_pair_gap = std::max(out.report.max_pair_gap, max_gap(e1, e2));
    }
    out.report.within_radius = out.report.max_marginal_gap <= 2.0 * out.report.radius &&
                               out.report.max_pair_gap <= 2.0 * out.report.radius;
    st.states.resize(static_cast<std::size_t>(last) + 1);
    out.states = std::move(st.states);
    return out;
}

DivergenceReport divergence_diagnostic(const LevyTriplet& noise, const OUConfig& cfg, const Vec& z0,
                                       const std::vector<double>& times, std::size_t n, std::uint64_t seed) {
    cfg.validate();
    if (noise.A.isZero(0.0) && noise.nu.empty())
        throw InvalidArgument("noise is a point mass; the diagnostic is vacuous");
    DivergenceReport rep;
    rep.bound = std::exp(cumulant(noise, z0).value.real() / cfg.c);
    if (rep.bound >= 1.0 - 1e-12) throw InvalidArgument("|mu^(z0)| = 1; choose another z0");
    std::vector<std::int64_t> rec;
    const auto k0 = cfg.first_epoch();
    for (double t : times) {
        const auto k = cfg.epoch(t) - k0;
        if (k < 1) throw InvalidArgument("times must lie at least one epoch after t0");
        rec.push_back(k - 1);
        rec.push_back(k);
    }
    const auto st = simulate_states(noise, cfg, n, rec, seed);
    rep.times = times;
    rep.radius = Tolerances::mc_multiplier / std::sqrt(static_cast<double>(n));
    const Vec w = cfg.b * z0;
    rep.pass = true;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const Mat diff = st.states[2 * i + 1] - st.states[2 * i];
        const double est = std::abs(ecf(diff, {w}).values[0]);
        rep.estimates.push_back(est);
        rep.pass = rep.pass && est <= rep.bound + rep.radius &&
                   est <= 1.0 - ((1.0 - rep.bound) / 2.0 - rep.radius);
    }
    return rep;
}

}  // namespace ssd
