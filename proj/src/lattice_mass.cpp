#include "ssd/lattice_mass.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ssd {

namespace {

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

bool same_ratio(double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(a, b); }

void trim(std::vector<double>& p) {
    while (!p.empty() && p.back() == 0.0) p.pop_back();
}

std::int64_t shift_index(std::int64_t k, std::int64_t s) {
    if (is_neg_inf(k) || is_pos_inf(k)) return k;
    return k - s;
}

double pow_int(double q, std::int64_t k) { return std::pow(q, static_cast<double>(k)); }

}  // namespace

// ---------------------------------------------------------------------------
// polynomial helpers

namespace poly {

std::vector<double> multiply(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<double> shift(const std::vector<double>& p, double s) {
    std::vector<double> out(p.size(), 0.0);
    // coefficient of k^i in (k + s)^j is C(j, i) s^(j - i)
    for (std::size_t j = 0; j < p.size(); ++j)
        for (std::size_t i = 0; i <= j; ++i)
            out[i] += p[j] * binom(static_cast<int>(j), static_cast<int>(i)) *
                      std::pow(s, static_cast<double>(j - i));
    return out;
}

double eval(const std::vector<double>& p, double k) {
    double r = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) r = r * k + p[i];
    return r;
}

std::vector<double> geometric_antidiff(const std::vector<double>& p, double q) {
    const int n = static_cast<int>(p.size()) - 1;
    std::vector<double> Q(p.size(), 0.0);
    for (int j = n; j >= 0; --j) {
        double acc = p[j];
        for (int i = j + 1; i <= n; ++i) acc += q * binom(i, j) * Q[i];
        Q[j] = acc / (1.0 - q);
    }
    return Q;
}

std::vector<double> antidiff(const std::vector<double>& p) {
    const int n = static_cast<int>(p.size()) - 1;
    std::vector<double> R(p.size() + 1, 0.0);
    for (int d = n + 1; d >= 1; --d) {
        double acc = p[d - 1];
        for (int j = d + 1; j <= n + 1; ++j) acc -= R[j] * binom(j, d - 1);
        R[d] = acc / d;
    }
    return R;
}

}  // namespace poly

// ---------------------------------------------------------------------------

double zeta_tail(double s, std::int64_t J) {
    if (!(s > 1.0)) return kInf;
    if (J < 1) throw InvalidArgument("zeta_tail requires J >= 1");
    const std::int64_t M = std::max<std::int64_t>(J, 32);
    double head = 0.0;
    for (std::int64_t j = M - 1; j >= J; --j) head += std::pow(static_cast<double>(j), -s);
    const double m = static_cast<double>(M);
    const double em = std::pow(m, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(m, -s) +
                      s * std::pow(m, -s - 1.0) / 12.0 -
                      s * (s + 1.0) * (s + 2.0) * std::pow(m, -s - 3.0) / 720.0 +
                      s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) *
                          std::pow(m, -s - 5.0) / 30240.0;
    return head + em;
}

double ExpPolyTerm::at(std::int64_t k) const {
    return pow_int(q, k) * poly::eval(poly, static_cast<double>(k));
}

std::vector<double> ExpPolyTerm::abs_poly() const {
    std::vector<double> out(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) out[i] = std::abs(poly[i]);
    return out;
}

double PowerTerm::at(std::int64_t k) const {
    if (k < lo || k > hi) return 0.0;
    return w * std::pow(static_cast<double>(k - offset), -p);
}

double MassSegment::at(std::int64_t k) const {
    double v = 0.0;
    for (const auto& t : terms) v += t.at(k);
    return v;
}

// ---------------------------------------------------------------------------
// construction

LatticeMass LatticeMass::geometric(double w, double q, std::int64_t lo, std::int64_t hi) {
    return exp_poly({w}, q, lo, hi);
}

LatticeMass LatticeMass::exp_poly(std::vector<double> p, double q, std::int64_t lo,
                                  std::int64_t hi) {
    if (!(q > 0.0) || !std::isfinite(q)) throw InvalidArgument("lattice ratio q must be > 0");
    if (lo > hi) throw InvalidArgument("lattice segment has lo > hi");
    for (double c : p)
        if (!std::isfinite(c)) throw InvalidArgument("lattice coefficient not finite");
    trim(p);
    LatticeMass m;
    if (p.empty()) return m;
    m.segments_ = normalize({MassSegment{lo, hi, {ExpPolyTerm{q, std::move(p)}}}});
    return m;
}

LatticeMass LatticeMass::point(std::int64_t k, double w) { return geometric(w, 1.0, k, k); }

LatticeMass LatticeMass::power(double w, double p, std::int64_t lo, std::int64_t hi,
                               std::int64_t offset) {
    if (!std::isfinite(w) || !std::isfinite(p)) throw InvalidArgument("power term not finite");
    if (lo - offset < 1) throw InvalidArgument("power term requires lo - offset >= 1");
    if (lo > hi) throw InvalidArgument("power term has lo > hi");
    LatticeMass m;
    if (w != 0.0) m.powers_.push_back(PowerTerm{w, p, offset, lo, hi});
    return m;
}

std::vector<MassSegment> LatticeMass::normalize(std::vector<MassSegment> raw) {
    std::set<std::int64_t> cuts;
    for (const auto& s : raw) {
        cuts.insert(s.lo);
        cuts.insert(s.hi + 1);
    }
    std::vector<std::int64_t> pts(cuts.begin(), cuts.end());
    std::vector<MassSegment> out;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const std::int64_t lo = pts[i];
        const std::int64_t hi = pts[i + 1] - 1;
        std::vector<ExpPolyTerm> merged;
        std::vector<std::vector<double>> scale;  // sum of |inputs| per coefficient
        for (const auto& s : raw) {
            if (s.lo > lo || s.hi < hi) continue;
            for (const auto& t : s.terms) {
                auto it = std::find_if(merged.begin(), merged.end(),
                                       [&](const ExpPolyTerm& m) { return same_ratio(m.q, t.q); });
                std::size_t idx;
                if (it == merged.end()) {
                    merged.push_back(ExpPolyTerm{t.q, {}});
                    scale.emplace_back();
                    idx = merged.size() - 1;
                } else {
                    idx = static_cast<std::size_t>(it - merged.begin());
                }
                auto& mp = merged[idx].poly;
                auto& sc = scale[idx];
                if (mp.size() < t.poly.size()) {
                    mp.resize(t.poly.size(), 0.0);
                    sc.resize(t.poly.size(), 0.0);
                }
                for (std::size_t j = 0; j < t.poly.size(); ++j) {
                    mp[j] += t.poly[j];
                    sc[j] += std::abs(t.poly[j]);
                }
            }
        }
        std::vector<ExpPolyTerm> kept;
        for (std::size_t m = 0; m < merged.size(); ++m) {
            auto& p = merged[m].poly;
            for (std::size_t j = 0; j < p.size(); ++j)
                if (std::abs(p[j]) <= 1e-13 * scale[m][j]) p[j] = 0.0;
            trim(p);
            if (!p.empty()) kept.push_back(std::move(merged[m]));
        }
        if (kept.empty()) continue;
        std::sort(kept.begin(), kept.end(),
                  [](const ExpPolyTerm& a, const ExpPolyTerm& b) { return a.q < b.q; });
        out.push_back(MassSegment{lo, hi, std::move(kept)});
    }
    // coalesce adjacent segments carrying identical terms
    auto same_terms = [](const MassSegment& a, const MassSegment& b) {
        if (a.terms.size() != b.terms.size()) return false;
        for (std::size_t i = 0; i < a.terms.size(); ++i) {
            const auto& x = a.terms[i];
            const auto& y = b.terms[i];
            if (!same_ratio(x.q, y.q) || x.poly.size() != y.poly.size()) return false;
            for (std::size_t j = 0; j < x.poly.size(); ++j)
                if (std::abs(x.poly[j] - y.poly[j]) >
                    1e-13 * std::max(std::abs(x.poly[j]), std::abs(y.poly[j])))
                    return false;
        }
        return true;
    };
    std::vector<MassSegment> coalesced;
    for (auto& s : out) {
        if (!coalesced.empty() && coalesced.back().hi + 1 == s.lo && same_terms(coalesced.back(), s))
            coalesced.back().hi = s.hi;
        else
            coalesced.push_back(std::move(s));
    }
    return coalesced;
}

// ---------------------------------------------------------------------------
// queries

double LatticeMass::at(std::int64_t k) const {
    double v = 0.0;
    auto it = std::upper_bound(segments_.begin(), segments_.end(), k,
                               [](std::int64_t key, const MassSegment& s) { return key < s.lo; });
    if (it != segments_.begin()) {
        const auto& s = *std::prev(it);
        if (k <= s.hi) v += s.at(k);
    }
    for (const auto& p : powers_) v += p.at(k);
    return v;
}

std::int64_t LatticeMass::lowest() const {
    std::int64_t lo = kIndexMax;
    if (!segments_.empty()) lo = segments_.front().lo;
    for (const auto& p : powers_) lo = std::min(lo, p.lo);
    return lo;
}

std::int64_t LatticeMass::highest() const {
    std::int64_t hi = kIndexMin;
    if (!segments_.empty()) hi = segments_.back().hi;
    for (const auto& p : powers_) hi = std::max(hi, p.hi);
    return hi;
}

LatticeMass LatticeMass::shifted(std::int64_t s) const {
    LatticeMass out;
    for (const auto& seg : segments_) {
        MassSegment ns{shift_index(seg.lo, s), shift_index(seg.hi, s), {}};
        for (const auto& t : seg.terms) {
            auto p = poly::shift(t.poly, static_cast<double>(s));
            const double f = pow_int(t.q, s);
            for (double& c : p) c *= f;
            ns.terms.push_back(ExpPolyTerm{t.q, std::move(p)});
        }
        out.segments_.push_back(std::move(ns));
    }
    for (auto p : powers_) {
        p.offset -= s;
        p.lo = shift_index(p.lo, s);
        p.hi = shift_index(p.hi, s);
        out.powers_.push_back(p);
    }
    return out;
}

LatticeMass LatticeMass::scaled(double f) const {
    LatticeMass out = *this;
    if (f == 0.0) return LatticeMass{};
    for (auto& seg : out.segments_)
        for (auto& t : seg.terms)
            for (double& c : t.poly) c *= f;
    for (auto& p : out.powers_) p.w *= f;
    return out;
}

LatticeMass operator+(const LatticeMass& a, const LatticeMass& b) {
    LatticeMass out;
    std::vector<MassSegment> raw = a.segments_;
    raw.insert(raw.end(), b.segments_.begin(), b.segments_.end());
    out.segments_ = LatticeMass::normalize(std::move(raw));
    out.powers_ = a.powers_;
    for (const auto& p : b.powers_) {
        auto it = std::find_if(out.powers_.begin(), out.powers_.end(), [&](const PowerTerm& q) {
            return q.p == p.p && q.offset == p.offset && q.lo == p.lo && q.hi == p.hi;
        });
        if (it == out.powers_.end()) {
            out.powers_.push_back(p);
        } else {
            const double sum = it->w + p.w;
            it->w = std::abs(sum) <= 1e-13 * (std::abs(it->w) + std::abs(p.w)) ? 0.0 : sum;
        }
    }
    std::erase_if(out.powers_, [](const PowerTerm& p) { return p.w == 0.0; });
    return out;
}

LatticeMass operator-(const LatticeMass& a, const LatticeMass& b) { return a + b.scaled(-1.0); }

LatticeMass LatticeMass::upper_tail_sum() const {
    if (has_power())
        throw Unsupported("upper tail sums of power-law lattice masses are not representable");
    std::vector<MassSegment> raw;
    double above = 0.0;
    for (std::size_t idx = segments_.size(); idx-- > 0;) {
        const auto& seg = segments_[idx];
        MassSegment res{seg.lo, seg.hi, {}};
        double constant = above;
        double seg_total = 0.0;
        for (const auto& t : seg.terms) {
            if (same_ratio(t.q, 1.0)) {
                if (is_pos_inf(seg.hi))
                    throw DomainError("lattice mass upper tail diverges (non-decaying mass)");
                const auto R = poly::antidiff(t.poly);
                const double top = poly::eval(R, static_cast<double>(seg.hi) + 1.0);
                std::vector<double> neg(R.size());
                for (std::size_t i = 0; i < R.size(); ++i) neg[i] = -R[i];
                res.terms.push_back(ExpPolyTerm{1.0, neg});
                constant += top;
                if (!is_neg_inf(seg.lo)) seg_total += top - poly::eval(R, static_cast<double>(seg.lo));
            } else {
                if (is_pos_inf(seg.hi) && t.q >= 1.0)
                    throw DomainError("lattice mass upper tail diverges (ratio q >= 1)");
                const auto Q = poly::geometric_antidiff(t.poly, t.q);
                const double top =
                    is_pos_inf(seg.hi)
                        ? 0.0
                        : pow_int(t.q, seg.hi + 1) * poly::eval(Q, static_cast<double>(seg.hi) + 1.0);
                res.terms.push_back(ExpPolyTerm{t.q, Q});
                constant -= top;
                if (!is_neg_inf(seg.lo))
                    seg_total += pow_int(t.q, seg.lo) * poly::eval(Q, static_cast<double>(seg.lo)) - top;
            }
        }
        if (constant != 0.0) res.terms.push_back(ExpPolyTerm{1.0, {constant}});
        raw.push_back(std::move(res));
        if (is_neg_inf(seg.lo)) break;
        above += seg_total;
        const std::int64_t gap_hi = seg.lo - 1;
        const std::int64_t gap_lo = idx > 0 ? segments_[idx - 1].hi + 1 : kIndexMin;
        if (gap_lo <= gap_hi && above != 0.0)
            raw.push_back(MassSegment{gap_lo, gap_hi, {ExpPolyTerm{1.0, {above}}}});
    }
    LatticeMass out;
    out.segments_ = normalize(std::move(raw));
    return out;
}

namespace {

// sum_{k=L}^{H} q^k P(k) in closed form; +inf when divergent.
double term_sum(double q, std::vector<double> P, std::int64_t L, std::int64_t H) {
    trim(P);
    if (P.empty() || L > H) return 0.0;
    if (same_ratio(q, 1.0)) {
        if (is_neg_inf(L) || is_pos_inf(H)) return kInf;
        const auto R = poly::antidiff(P);
        return poly::eval(R, static_cast<double>(H) + 1.0) - poly::eval(R, static_cast<double>(L));
    }
    if (is_pos_inf(H) && q >= 1.0) return kInf;
    if (is_neg_inf(L) && q <= 1.0) return kInf;
    const auto Q = poly::geometric_antidiff(P, q);
    const double g_lo = is_neg_inf(L) ? 0.0 : pow_int(q, L) * poly::eval(Q, static_cast<double>(L));
    const double g_hi =
        is_pos_inf(H) ? 0.0 : pow_int(q, H + 1) * poly::eval(Q, static_cast<double>(H) + 1.0);
    return g_lo - g_hi;
}

std::vector<double> linear_power(double a, double b, int n) {
    std::vector<double> lin{a, b};
    std::vector<double> factor{1.0};
    for (int i = 0; i < n; ++i) factor = poly::multiply(factor, lin);
    return factor;
}

// sum_{k=L}^{H} w (k - offset)^(-p) (a + b k)^n
double power_sum(const PowerTerm& pt, std::int64_t L, std::int64_t H, double a, double b, int n) {
    L = std::max(L, pt.lo);
    H = std::min(H, pt.hi);
    if (L > H) return 0.0;
    // (a + b k)^n with k = j + offset expands in powers of j
    const double base = a + b * static_cast<double>(pt.offset);
    const std::int64_t J1 = L - pt.offset;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double coef = binom(n, i) * std::pow(base, n - i) * std::pow(b, i);
        if (coef == 0.0) continue;
        const double s = pt.p - i;
        double part;
        if (is_pos_inf(H)) {
            if (s <= 1.0) return kInf;
            part = zeta_tail(s, J1);
        } else {
            const std::int64_t J2 = H - pt.offset;
            if (J2 - J1 <= 2000000) {
                part = 0.0;
                for (std::int64_t j = J2; j >= J1; --j) part += std::pow(static_cast<double>(j), -s);
            } else {
                if (s <= 1.0) throw Unsupported("power-law moment over a very long finite range");
                part = zeta_tail(s, J1) - zeta_tail(s, J2 + 1);
            }
        }
        sum += pt.w * coef * part;
    }
    return sum;
}

}  // namespace

double LatticeMass::poly_moment(std::int64_t lo, std::int64_t hi, double a, double b,
                                int n) const {
    const auto factor = linear_power(a, b, n);
    double sum = 0.0;
    for (const auto& seg : segments_) {
        const std::int64_t L = std::max(lo, seg.lo);
        const std::int64_t H = std::min(hi, seg.hi);
        for (const auto& t : seg.terms) {
            const double v = term_sum(t.q, poly::multiply(t.poly, factor), L, H);
            if (std::isinf(v)) return kInf;
            sum += v;
        }
    }
    for (const auto& p : powers_) {
        const double v = power_sum(p, lo, hi, a, b, n);
        if (std::isinf(v)) return kInf;
        sum += v;
    }
    return sum;
}

double LatticeMass::abs_moment(std::int64_t lo, std::int64_t hi, double g, double a, double b,
                               int n) const {
    const auto factor = linear_power(a, b, n);
    double sum = 0.0;
    for (const auto& seg : segments_) {
        const std::int64_t L = std::max(lo, seg.lo);
        const std::int64_t H = std::min(hi, seg.hi);
        if (L > H) continue;
        for (const auto& t : seg.terms) {
            // |P(k)| <= sum_j |c_j| |k|^j, written as a polynomial on each side of 0
            std::vector<double> pos(t.poly.size()), neg(t.poly.size());
            for (std::size_t j = 0; j < t.poly.size(); ++j) {
                pos[j] = std::abs(t.poly[j]);
                neg[j] = (j % 2 == 0) ? pos[j] : -pos[j];
            }
            const double qg = t.q * g;
            const double v = term_sum(qg, poly::multiply(pos, factor), std::max<std::int64_t>(L, 0), H) +
                             term_sum(qg, poly::multiply(neg, factor), L, std::min<std::int64_t>(H, -1));
            if (std::isinf(v)) return kInf;
            sum += v;
        }
    }
    for (auto p : powers_) {
        p.w = std::abs(p.w);
        const std::int64_t L = std::max(lo, p.lo);
        const std::int64_t H = std::min(hi, p.hi);
        if (L > H) continue;
        double v;
        if (g == 1.0 || (g < 1.0 && (is_pos_inf(H) || H - L > 2000000))) {
            // g < 1 with a long range: bounded by the untilted sum when the range is positive
            if (g < 1.0 && L < 0) throw Unsupported("tilted power-law bound on a negative range");
            v = power_sum(p, L, H, a, b, n);
        } else if (!is_pos_inf(H) && H - L <= 2000000) {
            v = 0.0;
            for (std::int64_t k = L; k <= H; ++k)
                v += p.at(k) * pow_int(g, k) * std::pow(a + b * static_cast<double>(k), n);
        } else {
            return kInf;
        }
        if (std::isinf(v)) return kInf;
        sum += v;
    }
    return sum;
}

double LatticeMass::tilted_total(std::int64_t lo, std::int64_t hi, double g) const {
    double sum = 0.0;
    for (const auto& seg : segments_) {
        const std::int64_t L = std::max(lo, seg.lo);
        const std::int64_t H = std::min(hi, seg.hi);
        for (const auto& t : seg.terms) {
            const double v = term_sum(t.q * g, t.poly, L, H);
            if (std::isinf(v)) return kInf;
            sum += v;
        }
    }
    for (const auto& p : powers_) {
        const std::int64_t L = std::max(lo, p.lo);
        const std::int64_t H = std::min(hi, p.hi);
        if (L > H) continue;
        if (g == 1.0) {
            sum += power_sum(p, L, H, 1.0, 0.0, 0);
        } else if (!is_pos_inf(H) && H - L <= 2000000) {
            for (std::int64_t k = L; k <= H; ++k) sum += p.at(k) * pow_int(g, k);
        } else {
            if (g > 1.0) return kInf;
            throw Unsupported("tilted sum of an unbounded power-law range");
        }
    }
    return sum;
}

bool LatticeMass::lower_tail_converges(double rho) const {
    for (const auto& seg : segments_) {
        if (!is_neg_inf(seg.lo)) continue;
        for (const auto& t : seg.terms)
            if (!(t.q * rho > 1.0)) return false;
    }
    return true;
}

bool LatticeMass::upper_tail_converges() const {
    for (const auto& seg : segments_) {
        if (!is_pos_inf(seg.hi)) continue;
        for (const auto& t : seg.terms)
            if (!(t.q < 1.0)) return false;
    }
    for (const auto& p : powers_)
        if (is_pos_inf(p.hi) && !(p.p > 1.0)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// sign decisions

namespace {

struct Mono {
    double ratio;  // growth base in the running variable
    int deg;
    double coef;
};

// Smallest K >= 1 such that the dominant monomial exceeds twice the sum of all
// others for every running index >= K.
std::int64_t dominance_threshold(const std::vector<Mono>& monos, std::size_t dom) {
    const Mono& d = monos[dom];
    double k0 = 1.0;
    for (std::size_t i = 0; i < monos.size(); ++i) {
        if (i == dom) continue;
        const Mono& m = monos[i];
        if (m.ratio < d.ratio && m.deg > d.deg)
            k0 = std::max(k0, std::ceil((m.deg - d.deg) / std::log(d.ratio / m.ratio)) + 1.0);
    }
    auto excess = [&](double k) {
        double s = 0.0;
        for (std::size_t i = 0; i < monos.size(); ++i) {
            if (i == dom) continue;
            const Mono& m = monos[i];
            s += std::abs(m.coef / d.coef) *
                 std::exp(k * std::log(m.ratio / d.ratio) + (m.deg - d.deg) * std::log(k));
        }
        return s;
    };
    double K = k0;
    while (excess(K) > 0.5) {
        K *= 2.0;
        if (K > 1e7) throw Unsupported("sign decision needs an excessively long explicit scan");
    }
    return static_cast<std::int64_t>(K);
}

// Dominant monomial toward +inf (sign = +1) or -inf (sign = -1) within one segment.
std::pair<std::int64_t, int> asymptotic(const MassSegment& seg, int direction) {
    std::vector<Mono> monos;
    for (const auto& t : seg.terms)
        for (std::size_t j = 0; j < t.poly.size(); ++j) {
            if (t.poly[j] == 0.0) continue;
            const double c = (direction < 0 && (j % 2 == 1)) ? -t.poly[j] : t.poly[j];
            monos.push_back(Mono{direction > 0 ? t.q : 1.0 / t.q, static_cast<int>(j), c});
        }
    std::size_t dom = 0;
    for (std::size_t i = 1; i < monos.size(); ++i) {
        const auto& a = monos[i];
        const auto& b = monos[dom];
        if (a.ratio > b.ratio * (1 + 1e-14) || (same_ratio(a.ratio, b.ratio) && a.deg > b.deg)) dom = i;
    }
    const std::int64_t K = dominance_threshold(monos, dom);
    return {K, monos[dom].coef > 0 ? 1 : -1};
}

}  // namespace

LatticeMass::SignReport LatticeMass::check_nonnegative(double rel_tol) const {
    SignReport rep;
    auto note = [&](std::int64_t k, double v) {
        if (!rep.first_negative || k < *rep.first_negative) {
            rep.nonnegative = false;
            rep.first_negative = k;
            rep.value_at_violation = v;
        }
    };
    for (const auto& seg : segments_) {
        std::int64_t lo = seg.lo;
        std::int64_t hi = seg.hi;
        if (is_pos_inf(hi)) {
            auto [K, sign] = asymptotic(seg, +1);
            hi = std::max(K, is_neg_inf(lo) ? K : lo);
            if (sign < 0) note(hi, seg.at(hi));
        }
        if (is_neg_inf(lo)) {
            auto [K, sign] = asymptotic(seg, -1);
            lo = std::min(-K, hi);
            if (sign < 0) {
                // negative all the way down; the infimum index is unbounded
                rep.nonnegative = false;
                rep.first_negative = kIndexMin;
                rep.value_at_violation = seg.at(lo);
            }
        }
        if (hi - lo > 4000000) throw Unsupported("sign decision range too long");
        for (std::int64_t k = lo; k <= hi; ++k) {
            double v = 0.0;
            double scale = 0.0;
            for (const auto& t : seg.terms) {
                const double x = t.at(k);
                v += x;
                scale += std::abs(x);
            }
            if (v < -rel_tol * scale) {
                note(k, v);
                break;
            }
        }
    }
    for (const auto& p : powers_) {
        if (p.w < 0.0) {
            if (!segments_.empty()) throw Unsupported("sign decision for mixed power/exponential mass");
            note(p.lo, p.at(p.lo));
        }
    }
    return rep;
}

double LatticeMass::max_abs_diff(const LatticeMass& a, const LatticeMass& b, std::int64_t lo,
                                 std::int64_t hi) {
    double worst = 0.0;
    for (std::int64_t k = lo; k <= hi; ++k) {
        const double x = a.at(k);
        const double y = b.at(k);
        const double s = std::max({std::abs(x), std::abs(y), 1e-300});
        const double d = std::abs(x - y);
        worst = std::max(worst, s > 1.0 ? d / s : d);
    }
    return worst;
}

}  // namespace ssd
