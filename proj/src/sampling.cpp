#include "ssd/sampling.hpp"
#include "ssd/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace ssd {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed ^ (salt * 0x9e3779b97f4a7c15ULL);
    x ^= x >> 31;
    x *= 0xbf58476d1ce4e5b9ULL;
    return x ^ (x >> 29);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x5eedu};
    eng.seed(seq);
}

namespace {

// largest k with radius(k) < eps
std::int64_t last_below(const ScaleLattice& L, double eps) {
    auto k = static_cast<std::int64_t>(std::floor(std::log(eps / L.anchor) / std::log(L.base)));
    while (L.radius(k) >= eps) --k;
    while (L.radius(k + 1) < eps) ++k;
    return k;
}

double small_m3(const std::vector<ScaleLattice>& lat, double eps) {
    double s = 0.0;
    for (const auto& L : lat) {
        if (eps <= 0.0) continue;
        const std::int64_t ke = last_below(L, eps);
        if (!is_neg_inf(L.mass.lowest()) && ke < L.mass.lowest()) continue;
        s += std::pow(L.anchor, 3) * L.mass.abs_moment(kIndexMin, ke, std::pow(L.base, 3), 1.0, 0.0, 0);
    }
    return s;
}

}  // namespace

IncrementSampler::IncrementSampler(const LevyTriplet& x1, double t, SamplerOptions opt) : t_(t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("time increment must be > 0");
    const auto rep = validate(x1);
    if (!rep.ok) throw InvalidArgument("invalid triplet: " + rep.violations.front());
    if (!x1.nu.radials.empty()) throw Unsupported("sampling radial densities is not supported");
    const int d = x1.dim();
    Mat cov = x1.A;
    Vec drift = x1.gamma;
    std::vector<double> weights;

    for (const auto& a : x1.nu.atoms) {
        points_.push_back(a.x);
        weights.push_back(a.w);
        drift -= a.w * a.x * lk::centering(a.x.norm());
    }

    // epsilon: 0 when every lattice is bounded below, otherwise the largest 2^{-j} whose
    // third-moment bound on the Gaussian replacement error meets cf_tol
    const auto& lat = x1.nu.lattices;
    const bool bounded_below =
        std::all_of(lat.begin(), lat.end(), [](const ScaleLattice& L) { return !is_neg_inf(L.mass.lowest()); });
    double eps = 0.0;
    if (!bounded_below) {
        const double scale = t * std::pow(opt.zmax, 3) / 6.0;
        eps = 1.0;
        while (scale * small_m3(lat, eps) > opt.cf_tol) {
            eps *= 0.5;
            if (eps < 1e-300) throw ToleranceError("no truncation level meets the variance criterion", kInf);
        }
    }
    info_.epsilon = eps;
    info_.small_m3 = small_m3(lat, eps);
    info_.cf_bound = t * std::pow(opt.zmax, 3) / 6.0 * info_.small_m3;

    double total_rate = 0.0;
    for (double w : weights) total_rate += w;
    for (const auto& L : lat) {
        std::int64_t lo = L.mass.lowest();
        if (eps > 0.0) lo = std::max(lo, last_below(L, eps) + 1);
        std::int64_t hi = L.mass.highest();
        if (is_pos_inf(hi)) {
            // drop the far tail once its mass is negligible
            hi = std::max<std::int64_t>(lo, L.last_inside_unit());
            std::int64_t step = 1;
            while (L.mass.abs_moment(hi + 1, kIndexMax, 1.0, 1.0, 0.0, 0) >
                   opt.tail_mass_tol * std::max(1.0, total_rate + L.mass.abs_moment(lo, hi, 1.0, 1.0, 0.0, 0))) {
                hi += step;
                step *= 2;
            }
            info_.dropped_tail_mass += L.mass.abs_moment(hi + 1, kIndexMax, 1.0, 1.0, 0.0, 0);
        }
        if (hi >= lo && static_cast<std::size_t>(hi - lo + 1) + points_.size() > opt.max_points)
            throw ToleranceError("too many lattice jump points for the truncation level",
                                 static_cast<double>(hi - lo + 1));
        for (std::int64_t k = lo; k <= hi; ++k) {
            const double w = L.mass.at(k);
            if (w == 0.0) continue;
            const double r = L.radius(k);
            points_.push_back(r * L.direction);
            weights.push_back(w);
            total_rate += w;
            drift -= w * r * lk::centering(r) * L.direction;
        }
        if (eps > 0.0) {
            const std::int64_t ke = lo - 1;
            const double var = L.anchor * L.anchor * L.mass.tilted_total(kIndexMin, ke, L.base * L.base);
            cov += var * L.direction * L.direction.transpose();
            info_.small_variance += var;
            // mean of the small jumps after centering: sum m(k) r^3 / (1 + r^2)
            double acc = 0.0;
            for (std::int64_t k = ke; !(!is_neg_inf(L.mass.lowest()) && k < L.mass.lowest()); --k) {
                const double r = L.radius(k);
                acc += L.mass.at(k) * r * r * r / (1.0 + r * r);
                if ((ke - k) % 16 == 15) {
                    const double rest =
                        std::pow(L.anchor, 3) * L.mass.abs_moment(kIndexMin, k - 1, std::pow(L.base, 3), 1.0, 0.0, 0);
                    if (rest <= 1e-17 * std::abs(acc) || rest == 0.0) break;
                }
            }
            drift += acc * L.direction;
        }
    }

    info_.scheme = eps > 0.0 ? "truncated-gaussian" : "exact";
    info_.jump_points = points_.size();
    info_.rate = total_rate;
    rate_t_ = t * total_rate;
    cum_.resize(weights.size());
    double c = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) cum_[i] = (c += weights[i]);

    mean_ = t * drift;
    const Mat sym = 0.5 * t * (cov + cov.transpose());
    root_ = Mat::Zero(d, d);
    if (sym.norm() > 0.0) {
        Eigen::SelfAdjointEigenSolver<Mat> es(sym);
        const Vec lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        root_ = es.eigenvectors() * lam.asDiagonal();
        has_gauss_ = true;
    }
}

void IncrementSampler::add_draw(RngStream& rng, double* out) const {
    const int d = dim();
    Eigen::Map<Vec> o(out, d);
    o += mean_;
    if (has_gauss_) {
        Vec g(d);
        for (int i = 0; i < d; ++i) g[i] = rng.gauss(rng.eng);
        o += root_ * g;
    }
    if (rate_t_ > static_cast<double>(points_.size())) {
        // many jumps per draw: one Poisson count per point is the same law and cheaper
        const double total = cum_.back();
        double prev = 0.0;
        for (std::size_t k = 0; k < points_.size(); ++k) {
            const double mean = rate_t_ * (cum_[k] - prev) / total;
            prev = cum_[k];
            if (mean <= 0.0) continue;
            const long n = std::poisson_distribution<long>(mean)(rng.eng);
            if (n) o += static_cast<double>(n) * points_[k];
        }
    } else if (rate_t_ > 0.0) {
        std::poisson_distribution<long> pois(rate_t_);
        const long n = pois(rng.eng);
        const double total = cum_.back();
        for (long j = 0; j < n; ++j) {
            const double u = rng.unif(rng.eng) * total;
            auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
            if (it == cum_.end()) --it;
            o += points_[static_cast<std::size_t>(it - cum_.begin())];
        }
    }
}

Vec IncrementSampler::draw(RngStream& rng) const {
    Vec v = Vec::Zero(dim());
    add_draw(rng, v.data());
    return v;
}

SampleBatch sample(const LevyTriplet& spec, double t, std::size_t n, std::uint64_t seed, SamplerOptions opt) {
    if (n < 1) throw InvalidArgument("sample size must be >= 1");
    const IncrementSampler s(spec, t, opt);
    SampleBatch out;
    out.n = n;
    out.seed = seed;
    out.t = t;
    out.info = s.info();
    out.values = Mat::Zero(spec.dim(), static_cast<Eigen::Index>(n));
    const std::size_t blocks = (n + kSampleBlock - 1) / kSampleBlock;
    parallel_for(blocks, [&](std::size_t blk) {
        RngStream rng(seed, blk);
        const std::size_t end = std::min(n, (blk + 1) * kSampleBlock);
        for (std::size_t j = blk * kSampleBlock; j < end; ++j)
            s.add_draw(rng, out.values.col(static_cast<Eigen::Index>(j)).data());
    });
    return out;
}

EcfResult ecf(const Mat& values, const std::vector<Vec>& grid, double q) {
    const auto n = values.cols();
    if (n < 2) throw InvalidArgument("ecf needs at least two draws");
    EcfResult r;
    r.grid = grid;
    r.values.resize(grid.size());
    r.radius = q / std::sqrt(static_cast<double>(n));
    parallel_for(grid.size(), [&](std::size_t i) {
        if (grid[i].size() != values.rows()) throw InvalidArgument("grid point has wrong dimension");
        const Eigen::RowVectorXd ph = grid[i].transpose() * values;
        double c = 0.0, s = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            c += std::cos(ph[j]);
            s += std::sin(ph[j]);
        }
        r.values[i] = Complex(c, s) / static_cast<double>(n);
    });
    return r;
}

}  // namespace ssd
