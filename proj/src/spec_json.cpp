#include "ssd/spec_json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ssd {

namespace {

[[noreturn]] void bad(const std::string& what) { throw InvalidArgument("spec: " + what); }

const Json& need(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
    return j.at(key);
}

double num(const Json& j, const char* what) {
    if (!j.is_number()) bad(std::string(what) + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) bad(std::string(what) + " must be finite");
    return v;
}

std::int64_t index_or(const Json& j, const char* key, std::int64_t fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    if (!j.at(key).is_number_integer()) bad(std::string(key) + " must be an integer or null");
    return j.at(key).get<std::int64_t>();
}

Json index_json(std::int64_t k) {
    if (is_neg_inf(k) || is_pos_inf(k)) return nullptr;
    return k;
}

std::vector<double> numbers(const Json& j, const char* what) {
    if (!j.is_array()) bad(std::string(what) + " must be an array");
    std::vector<double> out;
    for (const auto& x : j) out.push_back(num(x, what));
    return out;
}

KShape kshape_from_json(const Json& j) {
    const auto type = need(j, "type").get<std::string>();
    if (type == "exp") return KShape::exp(num(need(j, "a"), "a"), num(need(j, "lambda"), "lambda"));
    if (type == "steps") return KShape::steps(numbers(need(j, "cuts"), "cuts"), numbers(need(j, "values"), "values"));
    if (type == "indicator") return KShape::indicator(num(need(j, "R"), "R"));
    if (type == "constant") return KShape::constant(num(need(j, "a"), "a"));
    bad("unknown k-function type '" + type + "'");
}

Json kshape_to_json(const KShape& k) {
    switch (k.kind) {
        case KShape::Kind::Exp: return {{"type", "exp"}, {"a", k.a}, {"lambda", k.lambda}};
        case KShape::Kind::Steps: return {{"type", "steps"}, {"cuts", k.cuts}, {"values", k.values}};
        case KShape::Kind::Constant: return {{"type", "constant"}, {"a", k.a}};
    }
    return nullptr;
}

}  // namespace

Json vec_to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec vec_from_json(const Json& j) {
    const auto xs = numbers(j, "vector");
    if (xs.empty()) bad("empty vector");
    return Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

Json mass_to_json(const LatticeMass& m) {
    Json terms = Json::array();
    for (const auto& seg : m.segments())
        for (const auto& t : seg.terms)
            terms.push_back({{"type", "exp_poly"}, {"poly", t.poly}, {"q", t.q}, {"lo", index_json(seg.lo)},
                             {"hi", index_json(seg.hi)}});
    for (const auto& p : m.power_terms())
        terms.push_back({{"type", "power"}, {"w", p.w}, {"p", p.p}, {"offset", p.offset}, {"lo", p.lo},
                         {"hi", index_json(p.hi)}});
    return terms;
}

LatticeMass mass_from_json(const Json& j) {
    if (j.is_array()) {
        LatticeMass acc;
        for (const auto& t : j) acc = acc + mass_from_json(t);
        return acc;
    }
    const auto type = need(j, "type").get<std::string>();
    const auto lo = index_or(j, "lo", kIndexMin);
    const auto hi = index_or(j, "hi", kIndexMax);
    if (type == "geometric") return LatticeMass::geometric(num(need(j, "w"), "w"), num(need(j, "q"), "q"), lo, hi);
    if (type == "exp_poly") return LatticeMass::exp_poly(numbers(need(j, "poly"), "poly"), num(need(j, "q"), "q"), lo, hi);
    if (type == "point") return LatticeMass::point(need(j, "k").get<std::int64_t>(), num(need(j, "w"), "w"));
    if (type == "power")
        return LatticeMass::power(num(need(j, "w"), "w"), num(need(j, "p"), "p"), index_or(j, "lo", 1), hi,
                                  index_or(j, "offset", 0));
    bad("unknown mass type '" + type + "'");
}

LevyTriplet triplet_from_json(const Json& j, bool check) {
    try {
        if (!j.is_object()) bad("top level must be an object");
        int d = 0;
        if (j.contains("drift")) d = static_cast<int>(vec_from_json(j.at("drift")).size());
        else if (j.contains("gauss")) d = static_cast<int>(need(j, "gauss").size());
        else if (j.contains("dim")) d = need(j, "dim").get<int>();
        if (d < 1) bad("cannot infer the dimension (give drift, gauss or dim)");
        auto t = LevyTriplet::zero(d);
        if (j.contains("drift")) t.gamma = vec_from_json(j.at("drift"));
        if (j.contains("gauss")) {
            const auto& g = j.at("gauss");
            if (!g.is_array() || static_cast<int>(g.size()) != d) bad("gauss must be a d x d array");
            for (int r = 0; r < d; ++r) {
                const auto row = numbers(g.at(r), "gauss row");
                if (static_cast<int>(row.size()) != d) bad("gauss must be a d x d array");
                for (int c = 0; c < d; ++c) t.A(r, c) = row[c];
            }
        }
        const Json levy = j.contains("levy") ? j.at("levy") : Json::array();
        if (!levy.is_array()) bad("levy must be an array");
        for (const auto& comp : levy) {
            const auto kind = need(comp, "kind").get<std::string>();
            auto dir = [&] {
                Vec v = vec_from_json(need(comp, "direction"));
                if (v.size() != d) bad("direction has wrong dimension");
                return v;
            };
            if (kind == "atoms") {
                for (const auto& p : need(comp, "points")) {
                    Vec x = vec_from_json(need(p, "x"));
                    if (x.size() != d) bad("atom has wrong dimension");
                    t.nu.add_atom(x, num(need(p, "w"), "w"));
                }
            } else if (kind == "lattice") {
                t.nu.add_lattice(dir(), num(need(comp, "base"), "base"),
                                 comp.contains("anchor") ? num(comp.at("anchor"), "anchor") : 1.0,
                                 mass_from_json(need(comp, "mass")));
            } else if (kind == "radial") {
                const auto fam = need(comp, "family").get<std::string>();
                if (fam == "tempered_stable") {
                    t.nu.add_radial(RadialDensity{dir(), TemperedStable{num(need(comp, "w"), "w"),
                                                                        num(need(comp, "alpha"), "alpha"),
                                                                        num(need(comp, "lambda"), "lambda")}});
                } else if (fam == "k_difference") {
                    t.nu.add_radial(RadialDensity{dir(), KDifference{kshape_from_json(need(comp, "k")),
                                                                     num(need(comp, "b"), "b"),
                                                                     comp.contains("weight") ? num(comp.at("weight"), "weight") : 1.0}});
                } else {
                    bad("unknown radial family '" + fam + "'");
                }
            } else if (kind == "semistable") {
                SemiStableSpec s;
                s.b = num(need(comp, "b"), "b");
                s.alpha = num(need(comp, "alpha"), "alpha");
                s.r0 = comp.contains("r0") ? num(comp.at("r0"), "r0") : 1.0;
                for (const auto& dj : need(comp, "directions")) {
                    Vec xi = vec_from_json(need(dj, "xi"));
                    if (xi.size() != d) bad("semistable direction has wrong dimension");
                    s.directions.emplace_back(xi, num(need(dj, "w"), "w"));
                }
                const auto ss = semi_stable_triplet(s);
                t.nu += ss.nu;
                t.gamma += ss.gamma;
            } else {
                bad("unknown component kind '" + kind + "'");
            }
        }
        if (check) {
            const auto rep = validate(t);
            if (!rep.ok) bad("not a Levy triplet: " + rep.violations.front());
        }
        return t;
    } catch (const Json::exception& e) {
        bad(e.what());
    }
}

Json triplet_to_json(const LevyTriplet& t) {
    Json j;
    j["schema"] = kSchemaVersion;
    Json g = Json::array();
    for (Eigen::Index r = 0; r < t.A.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < t.A.cols(); ++c) row.push_back(t.A(r, c));
        g.push_back(row);
    }
    j["gauss"] = g;
    j["drift"] = vec_to_json(t.gamma);
    Json levy = Json::array();
    if (!t.nu.atoms.empty()) {
        Json pts = Json::array();
        for (const auto& a : t.nu.atoms) pts.push_back({{"x", vec_to_json(a.x)}, {"w", a.w}});
        levy.push_back({{"kind", "atoms"}, {"points", pts}});
    }
    for (const auto& L : t.nu.lattices)
        levy.push_back({{"kind", "lattice"}, {"direction", vec_to_json(L.direction)}, {"base", L.base},
                        {"anchor", L.anchor}, {"mass", mass_to_json(L.mass)}});
    for (const auto& R : t.nu.radials) {
        if (const auto* ts = std::get_if<TemperedStable>(&R.family))
            levy.push_back({{"kind", "radial"}, {"family", "tempered_stable"}, {"direction", vec_to_json(R.direction)},
                            {"w", ts->w}, {"alpha", ts->alpha}, {"lambda", ts->lambda}});
        else {
            const auto& kd = std::get<KDifference>(R.family);
            levy.push_back({{"kind", "radial"}, {"family", "k_difference"}, {"direction", vec_to_json(R.direction)},
                            {"k", kshape_to_json(kd.k)}, {"b", kd.b}, {"weight", kd.weight}});
        }
    }
    j["levy"] = levy;
    return j;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::string spec_hash(const Json& j) { return fnv1a_hex(j.dump()); }

Json certificate_to_json(const MembershipCertificate& c) {
    Json j;
    j["kind"] = c.kind;
    j["b"] = c.b;
    j["m"] = c.m;
    j["verdict"] = c.verdict();
    j["levels"] = c.levels;
    j["residual"] = c.residual;
    j["tol"] = c.tol;
    if (c.clipped_residual >= 0.0) j["clipped_residual"] = c.clipped_residual;
    Json fs = Json::array();
    for (const auto& f : c.factors) fs.push_back(triplet_to_json(f));
    j["factors"] = fs;
    if (c.violation) {
        const auto& v = *c.violation;
        j["violation"] = {{"level", c.violation_level}, {"direction", vec_to_json(v.direction)},
                          {"radius", v.radius}, {"index", index_json(v.index)}, {"mass", v.mass},
                          {"what", v.what}};
    }
    j["notes"] = c.notes;
    return j;
}

Json semistable_fit_to_json(const SemiStableFit& f) {
    return {{"kind", "semi-stable"}, {"verdict", f.verdict}, {"a", f.a}, {"c", vec_to_json(f.c)},
            {"z_ref", vec_to_json(f.z_ref)}, {"residual", f.residual}};
}

Json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw InvalidArgument("cannot open " + p.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw InvalidArgument(p.string() + ": " + e.what());
    }
}

void write_file_atomic(const std::filesystem::path& p, const std::string& content) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, p);
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string cumulant_csv(const std::vector<Vec>& grid, const std::vector<Bounded<Complex>>& values,
                         const std::vector<std::pair<std::string, std::string>>& header) {
    std::ostringstream os;
    for (const auto& [k, v] : header) os << "# " << k << "=" << v << "\n";
    const auto d = grid.empty() ? 0 : grid.front().size();
    for (Eigen::Index i = 0; i < d; ++i) os << "z" << i + 1 << ",";
    os << "re,im,err\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (Eigen::Index c = 0; c < d; ++c) os << fmt(grid[i][c]) << ",";
        os << fmt(values[i].value.real()) << "," << fmt(values[i].value.imag()) << "," << fmt(values[i].err) << "\n";
    }
    return os.str();
}

std::string batch_csv(const SampleBatch& b, const std::string& hash, const std::string& manifest) {
    std::ostringstream os;
    os << "# seed=" << b.seed << "\n# t=" << fmt(b.t) << "\n# spec_hash=" << hash << "\n# manifest=" << manifest
       << "\n# scheme=" << b.info.scheme << "\n# epsilon=" << fmt(b.info.epsilon) << "\n";
    for (Eigen::Index i = 0; i < b.values.rows(); ++i) os << (i ? "," : "") << "x" << i + 1;
    os << "\n";
    for (Eigen::Index j = 0; j < b.values.cols(); ++j) {
        for (Eigen::Index i = 0; i < b.values.rows(); ++i) os << (i ? "," : "") << fmt(b.values(i, j));
        os << "\n";
    }
    return os.str();
}

std::string path_csv(const std::vector<OUPath>& paths, const std::string& manifest) {
    std::ostringstream os;
    os << "# manifest=" << manifest << "\n";
    if (paths.empty()) return os.str();
    const auto d = paths.front().M().size();
    os << "path,epoch,time";
    for (Eigen::Index i = 0; i < d; ++i) os << ",z" << i + 1;
    for (Eigen::Index i = 0; i < d; ++i) os << ",dx" << i + 1;
    os << "\n";
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const auto& P = paths[p];
        for (std::size_t i = 0; i < P.states.size(); ++i) {
            const auto k = P.k0 + static_cast<std::int64_t>(i);
            os << p << "," << k << "," << fmt(static_cast<double>(k) / P.c);
            for (Eigen::Index c = 0; c < d; ++c) os << "," << fmt(P.states[i][c]);
            for (Eigen::Index c = 0; c < d; ++c) os << "," << (i == 0 ? std::string("0") : fmt(P.increments[i - 1][c]));
            os << "\n";
        }
    }
    return os.str();
}

}  // namespace ssd
