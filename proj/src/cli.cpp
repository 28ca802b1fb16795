#include "ssd/cli.hpp"
#include "ssd/grid.hpp"
#include "ssd/parallel.hpp"
#include "ssd/spec_json.hpp"
#include "ssd/verify.hpp"

#include <CLI11.hpp>
#include <boost/version.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <optional>

namespace ssd::cli {

namespace {

namespace fs = std::filesystem;

double env_double(const char* name, double fallback) {
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != std::string(v).size() || !(x > 0.0)) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw InvalidArgument(std::string(name) + " must be a positive number");
    }
}

void apply_thread_env() {
    const char* v = std::getenv("SSDTOOL_THREADS");
    if (!v || !*v) return;
    try {
        std::size_t pos = 0;
        const long n = std::stol(v, &pos);
        if (pos != std::string(v).size() || n < 0) throw std::invalid_argument(v);
        set_thread_count(static_cast<unsigned>(n));
    } catch (const std::exception&) {
        throw InvalidArgument("SSDTOOL_THREADS must be a nonnegative integer");
    }
}

// Everything needed to reproduce a run; wall-time lives outside the hashed part.
class Manifest {
public:
    Manifest(std::string command, const std::vector<std::string>& args) : start_(std::chrono::steady_clock::now()) {
        j_["tool"] = "ssdtool";
        j_["command"] = std::move(command);
        j_["args"] = args;
        j_["versions"] = {{"ssdtool", kVersion},
                          {"schema", kSchemaVersion},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                        "." + std::to_string(EIGEN_MINOR_VERSION)},
                          {"boost", BOOST_LIB_VERSION},
                          {"cli11", CLI11_VERSION}};
        j_["spec_hashes"] = Json::object();
        j_["seed"] = nullptr;
        j_["tolerances"] = Json::object();
        j_["options"] = Json::object();
    }

    Json& operator[](const char* key) { return j_[key]; }
    std::string hash() const { return spec_hash(j_); }
    const Json& body() const { return j_; }

    void write(const fs::path& dir) const {
        Json out = j_;
        out["hash"] = hash();
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        const std::time_t now = std::time(nullptr);
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        out["timing"] = {{"wall_seconds", wall}, {"finished_utc", stamp}};
        write_file_atomic(dir / "manifest.json", out.dump(2) + "\n");
    }

private:
    Json j_;
    std::chrono::steady_clock::time_point start_;
};

struct Loaded {
    LevyTriplet t;
    std::string hash;
};

Loaded load_spec(const std::string& path) {
    const auto j = read_json_file(path);
    auto t = triplet_from_json(j);
    // hash of the canonical form, so formatting differences do not matter
    return {t, spec_hash(triplet_to_json(t))};
}

template <class F>
std::vector<Bounded<Complex>> on_grid(const std::vector<Vec>& grid, F f) {
    std::vector<Bounded<Complex>> out(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { out[i] = f(grid[i]); });
    return out;
}

Vec parse_vector(const std::string& s, int d) {
    std::vector<double> xs;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto next = s.find(',', pos);
        const auto tok = s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        try {
            std::size_t used = 0;
            xs.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw InvalidArgument("bad vector component '" + tok + "'");
        }
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    if (static_cast<int>(xs.size()) != d) throw InvalidArgument("vector has wrong dimension");
    return Eigen::Map<Vec>(xs.data(), d);
}

std::string fmt_num(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

// ---------------------------------------------------------------------------

struct MapOpts {
    std::string spec;
    double b = 0.0;
    bool inverse = false;
    int m = 0;
    double zmax = 5.0;
    int points = 101;
    double tol = 1e-10;
    std::string out;
};

int cmd_map(const MapOpts& o, const std::vector<std::string>& args) {
    const auto in = load_spec(o.spec);
    const SpanConfig cfg(o.b);
    if (o.inverse && o.m != 0) throw InvalidArgument("--inverse works on a single step (m = 0)");
    if (o.m < 0 || o.m > kMaxIterLevel) throw InvalidArgument("--m must lie in [0, " + std::to_string(kMaxIterLevel) + "]");
    const auto grid = axis_grid(in.t.dim(), o.zmax, o.points);

    Manifest man("map", args);
    man["spec_hashes"]["input"] = in.hash;
    man["tolerances"]["series"] = o.tol;
    man["options"] = {{"b", o.b}, {"inverse", o.inverse}, {"m", o.m}, {"zmax", o.zmax}, {"points", o.points}};
    const auto mh = man.hash();

    Json info = {{"b", o.b}, {"m", o.m}, {"inverse", o.inverse}, {"input_hash", in.hash}};
    std::optional<LevyTriplet> result;
    std::vector<Bounded<Complex>> values;
    bool valid = true;
    if (o.inverse) {
        auto inv = phi_inverse(in.t, cfg);
        valid = inv.valid;
        info["reasons"] = inv.reasons;
        if (inv.violation)
            info["violation"] = {{"direction", vec_to_json(inv.violation->direction)}, {"radius", inv.violation->radius},
                                 {"mass", inv.violation->mass}, {"what", inv.violation->what}};
        values = on_grid(grid, [&](const Vec& z) { return cumulant(inv.rho, z, o.tol); });
        result = std::move(inv.rho);
    } else {
        values = on_grid(grid, [&](const Vec& z) {
            return o.m == 0 ? phi_forward_cumulant(in.t, cfg, z, o.tol)
                            : phi_iter_cumulant(in.t, IterConfig(o.b, o.m), z, o.tol);
        });
        try {
            LevyTriplet t = in.t;
            for (int j = 0; j <= o.m; ++j) t = phi_forward_triplet(t, cfg);
            result = std::move(t);
        } catch (const Unsupported& e) {
            info["note"] = std::string("image triplet has no exact form: ") + e.what();
        }
    }
    info["valid"] = valid;

    const fs::path dir(o.out);
    Json tj = result ? triplet_to_json(*result) : Json::object();
    tj["manifest"] = mh;
    tj["map"] = info;
    tj["exact"] = result.has_value();
    if (result) tj["map"]["output_hash"] = spec_hash(triplet_to_json(*result));
    write_file_atomic(dir / "triplet.json", tj.dump(2) + "\n");
    write_file_atomic(dir / "cumulant.csv",
                      cumulant_csv(grid, values,
                                   {{"manifest", mh}, {"spec_hash", in.hash}, {"b", fmt_num(o.b)},
                                    {"m", std::to_string(o.m)}, {"map", o.inverse ? "inverse" : "forward"}}));
    man.write(dir);
    std::cout << (o.inverse ? "inverse" : "forward") << " map written to " << dir.string()
              << (valid ? "" : " (result is not a Levy triplet)") << "\n";
    return valid ? kOk : kNegative;
}

// ---------------------------------------------------------------------------

struct CheckOpts {
    std::string spec;
    double b = 0.0;
    int level = 0;
    bool semistable = false;
    double zmax = 5.0;
    int points = 101;
    double tol = 1e-8;
    std::string out;
};

int cmd_check(const CheckOpts& o, const std::vector<std::string>& args) {
    const auto in = load_spec(o.spec);
    const auto grid = axis_grid(in.t.dim(), o.zmax, o.points);
    Manifest man("check", args);
    man["spec_hashes"]["input"] = in.hash;
    man["tolerances"]["residual"] = o.tol;
    man["options"] = {{"b", o.b}, {"level", o.level}, {"semistable", o.semistable}, {"zmax", o.zmax}, {"points", o.points}};
    const auto mh = man.hash();

    Json cert;
    bool verdict = false;
    if (o.semistable) {
        (void)SpanConfig(o.b);
        const auto fit = is_semi_stable(in.t, o.b, grid, o.tol);
        cert = semistable_fit_to_json(fit);
        verdict = fit.verdict;
    } else {
        const auto c = is_Lm_member(in.t, IterConfig(o.b, o.level), grid, o.tol);
        cert = certificate_to_json(c);
        verdict = c.verdict();
    }
    cert["spec_hash"] = in.hash;
    cert["manifest"] = mh;
    if (o.out.empty()) {
        Json full = cert;
        full["manifest"] = man.body();
        full["manifest"]["hash"] = mh;
        std::cout << full.dump(2) << "\n";
    } else {
        write_file_atomic(fs::path(o.out) / "certificate.json", cert.dump(2) + "\n");
        man.write(o.out);
        std::cout << (verdict ? "member" : "not a member") << "\n";
    }
    return verdict ? kOk : kNegative;
}

// ---------------------------------------------------------------------------

struct SimOpts {
    std::string spec;
    double b = 0.0;
    double c = 1.0;
    int steps = 60;
    std::optional<double> horizon;
    std::size_t paths = 10000;
    std::string init = "zero";
    std::string m0;
    std::uint64_t seed = 42;
    bool semistationary = false;
    std::size_t write_paths = 100;
    double zmax = 3.0;
    int points = 21;
    std::string out;
};

double max_abs_gap(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

int cmd_simulate(const SimOpts& o, const std::vector<std::string>& args) {
    const auto in = load_spec(o.spec);
    const int d = in.t.dim();
    if (o.steps < 0) throw InvalidArgument("--steps must be >= 0");
    if (o.paths < 2) throw InvalidArgument("--paths must be >= 2");
    OUConfig cfg;
    cfg.b = o.b;
    cfg.c = o.c;
    cfg.t0 = 0.0;
    cfg.T = o.horizon ? *o.horizon : o.steps / o.c;
    if (o.semistationary || o.init == "limit") cfg.init = OUInit::limit();
    else if (o.init == "zero") cfg.init = OUInit::constant(Vec::Zero(d));
    else if (o.init == "const") {
        if (o.m0.empty()) throw InvalidArgument("--init const needs --m0");
        cfg.init = OUInit::constant(parse_vector(o.m0, d));
    } else throw InvalidArgument("--init must be zero, const or limit");
    cfg.validate();
    const auto epochs = cfg.last_epoch() - cfg.first_epoch();
    const auto grid = axis_grid(d, o.zmax, o.points);

    Manifest man("simulate", args);
    man["spec_hashes"]["input"] = in.hash;
    man["seed"] = o.seed;
    man["tolerances"] = {{"cf_tol", SamplerOptions{}.cf_tol}, {"limit_truncation", 1e-4}, {"mc_multiplier", Tolerances::mc_multiplier}};
    man["options"] = {{"b", o.b}, {"c", o.c}, {"T", cfg.T}, {"epochs", epochs}, {"paths", o.paths},
                      {"init", o.semistationary ? "limit" : o.init}, {"semistationary", o.semistationary},
                      {"write_paths", o.write_paths}, {"zmax", o.zmax}, {"points", o.points}};
    if (cfg.init.kind == OUInit::Kind::Constant) man["options"]["m0"] = vec_to_json(cfg.init.value);
    const auto mh = man.hash();

    Json rep;
    rep["manifest"] = mh;
    rep["spec_hash"] = in.hash;
    rep["mode"] = o.semistationary ? "semistationary" : o.init;
    rep["epochs"] = epochs;
    rep["paths"] = o.paths;
    rep["seed"] = o.seed;
    const bool limit_mode = cfg.init.kind == OUInit::Kind::Limit;

    std::optional<LimitTruncation> trunc;
    if (limit_mode) trunc = limit_truncation(in.t, cfg, o.zmax);  // DomainError on an infinite log-moment

    // exported sample paths; seeds are mix_seed(seed, 1000 + p)
    std::vector<OUPath> written;
    const auto w = std::min(o.write_paths, o.paths);
    LangevinReport lang;
    for (std::size_t p = 0; p < w; ++p) {
        written.push_back(simulate_path(in.t, cfg, mix_seed(o.seed, 1000 + p)));
        const auto r = verify_langevin(written.back());
        lang.max_abs = std::max(lang.max_abs, r.max_abs);
        lang.max_rel = std::max(lang.max_rel, r.max_rel);
    }
    rep["langevin"] = {{"paths", w}, {"max_abs", lang.max_abs}, {"max_rel", lang.max_rel}, {"pass", lang.max_rel <= 1e-10}};
    bool pass = lang.max_rel <= 1e-10;

    auto limit_cf = [&](const Vec& z) { return std::exp(limit_cumulant(in.t, cfg, z).value); };

    if (o.semistationary) {
        const auto s = semistationary_path(in.t, cfg, 0, cfg.T, o.paths, o.seed);
        rep["semistationary"] = {{"shift", s.report.shift},
                                 {"radius", s.report.radius},
                                 {"max_marginal_gap", s.report.max_marginal_gap},
                                 {"max_pair_gap", s.report.max_pair_gap},
                                 {"truncation_K", s.truncation.K},
                                 {"truncation_bound", s.truncation.bound},
                                 {"pass", s.report.within_radius}};
        pass = pass && s.report.within_radius;
    } else {
        std::vector<std::int64_t> rec;
        if (limit_mode)
            for (int q = 0; q <= 4; ++q) rec.push_back(epochs * q / 4);
        else
            rec.push_back(epochs);
        const auto st = simulate_states(in.t, cfg, o.paths, rec, o.seed, o.zmax);
        rep["sampler"] = {{"scheme", st.noise_info.scheme}, {"epsilon", st.noise_info.epsilon},
                          {"cf_bound", st.noise_info.cf_bound}, {"dropped_tail_mass", st.noise_info.dropped_tail_mass}};
        const double radius = Tolerances::mc_multiplier / std::sqrt(static_cast<double>(o.paths));
        std::vector<Complex> lim;
        std::optional<std::string> lim_note;
        try {
            for (const auto& z : grid) lim.push_back(limit_cf(z));
        } catch (const DomainError& e) {
            if (limit_mode) throw;
            lim_note = e.what();
        }
        if (limit_mode) {
            const double bias = trunc->bound;
            Json per = Json::array();
            bool ok = true;
            for (std::size_t i = 0; i < rec.size(); ++i) {
                const double dev = max_abs_gap(ecf(st.states[i], grid).values, lim);
                ok = ok && dev <= radius + bias;
                per.push_back({{"epoch", rec[i]}, {"max_dev", dev}});
            }
            rep["stationarity"] = {{"radius", radius}, {"bias", bias}, {"truncation_K", trunc->K}, {"epochs", per}, {"pass", ok}};
            pass = pass && ok;
        } else {
            const auto e = ecf(st.states[0], grid).values;
            std::vector<Complex> exact;
            for (const auto& z : grid)
                exact.push_back(std::exp(transition_cumulant(in.t, cfg, cfg.t0, cfg.T, cfg.init.value, z)));
            const double dev = max_abs_gap(e, exact);
            Json ecf_rep = {{"radius", radius}, {"max_dev_transition", dev}, {"pass", dev <= radius}};
            if (lim_note) ecf_rep["limit"] = {{"note", *lim_note}};
            else
                ecf_rep["limit"] = {{"max_dev", max_abs_gap(e, lim)}, {"law_gap", max_abs_gap(exact, lim)}};
            rep["ecf"] = ecf_rep;
            pass = pass && dev <= radius;
        }
    }
    rep["pass"] = pass;

    const fs::path dir(o.out);
    write_file_atomic(dir / "paths.csv", path_csv(written, mh));
    write_file_atomic(dir / "report.json", rep.dump(2) + "\n");
    man.write(dir);
    std::cout << "simulation written to " << dir.string() << (pass ? "" : " (validation failed, see report.json)") << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& out, const std::vector<std::string>& args) {
    Manifest man("verify", args);
    man["seed"] = seed;
    man["options"] = {{"suite", suite}};
    const auto res = run_suite(suite, seed);
    Json checks = Json::array();
    for (const auto& c : res.checks) {
        Json e = {{"suite", c.suite}, {"name", c.name}, {"value", c.value}, {"limit", c.limit},
                  {"relation", c.relation}, {"pass", c.pass}};
        if (!c.note.empty()) e["note"] = c.note;
        checks.push_back(e);
    }
    Json summary = {{"manifest", man.hash()}, {"suite", suite}, {"seed", seed}, {"pass", res.pass()},
                    {"checks", checks}};
    if (out.empty()) {
        std::cout << summary.dump(2) << "\n";
    } else {
        write_file_atomic(out, summary.dump(2) + "\n");
        for (const auto& c : res.checks) std::cout << (c.pass ? "PASS " : "FAIL ") << c.suite << ": " << c.name << "\n";
    }
    return res.pass() ? kOk : kNegative;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Semi-selfdecomposable distributions: span-b mappings, membership checks and OU simulation"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    const double env_tol = [] {
        try {
            return env_double("SSDTOOL_TOL", 0.0);
        } catch (const InvalidArgument&) {
            return -1.0;
        }
    }();

    MapOpts mo;
    auto* map = app.add_subcommand("map", "forward / inverse / iterated span-b mapping of a spec");
    map->add_option("spec", mo.spec, "spec JSON")->required()->check(CLI::ExistingFile);
    map->add_option("--b", mo.b, "span b > 1")->required();
    map->add_flag("--inverse", mo.inverse, "difference map instead of the forward map");
    map->add_option("--m", mo.m, "iteration level (0 = single map)")->capture_default_str();
    map->add_option("--zmax", mo.zmax, "grid radius")->capture_default_str();
    map->add_option("--points", mo.points, "grid points per axis")->capture_default_str();
    map->add_option("--tol", mo.tol, "series tolerance (env SSDTOOL_TOL)")->capture_default_str();
    map->add_option("--out", mo.out, "output directory")->required();

    CheckOpts co;
    auto* check = app.add_subcommand("check", "membership certificate");
    check->add_option("spec", co.spec, "spec JSON")->required()->check(CLI::ExistingFile);
    check->add_option("--b", co.b, "span b > 1")->required();
    check->add_option("--level", co.level, "iteration level m")->capture_default_str();
    check->add_flag("--semistable", co.semistable, "test b-semi-stability instead");
    check->add_option("--zmax", co.zmax, "grid radius")->capture_default_str();
    check->add_option("--points", co.points, "grid points per axis")->capture_default_str();
    check->add_option("--tol", co.tol, "residual tolerance (env SSDTOOL_TOL)")->capture_default_str();
    check->add_option("--out", co.out, "output directory (stdout when absent)");

    SimOpts so;
    double horizon = -1.0;
    auto* sim = app.add_subcommand("simulate", "OU-type process with the given law as X_1 of the noise");
    sim->add_option("spec", so.spec, "spec JSON for X_1")->required()->check(CLI::ExistingFile);
    sim->add_option("--b", so.b, "span b > 1")->required();
    sim->add_option("--c", so.c, "epochs per unit time")->capture_default_str();
    sim->add_option("--steps", so.steps, "number of epochs")->capture_default_str();
    sim->add_option("--horizon", horizon, "end time T (overrides --steps)");
    sim->add_option("--paths", so.paths, "Monte Carlo paths")->capture_default_str();
    sim->add_option("--init", so.init, "zero | const | limit")->capture_default_str();
    sim->add_option("--m0", so.m0, "initial state for --init const, comma separated");
    sim->add_option("--seed", so.seed, "master seed")->capture_default_str();
    sim->add_flag("--semistationary", so.semistationary, "two-sided construction, shift-invariance report");
    sim->add_option("--write-paths", so.write_paths, "paths exported to CSV")->capture_default_str();
    sim->add_option("--zmax", so.zmax, "ECF grid radius")->capture_default_str();
    sim->add_option("--points", so.points, "ECF grid points per axis")->capture_default_str();
    sim->add_option("--out", so.out, "output directory")->required();

    std::string suite = "all";
    std::uint64_t vseed = 42;
    std::string vout;
    auto* ver = app.add_subcommand("verify", "run the property suites");
    ver->add_option("--suite", suite, "core | ou | iterate | all")->capture_default_str()
        ->check(CLI::IsMember({"core", "ou", "iterate", "all"}));
    ver->add_option("--seed", vseed, "seed")->capture_default_str();
    ver->add_option("--out", vout, "summary JSON file (stdout when absent)");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kParse;
    }

    try {
        if (env_tol < 0.0) throw InvalidArgument("SSDTOOL_TOL must be a positive number");
        apply_thread_env();
        if (*map) {
            if (env_tol > 0.0 && map->count("--tol") == 0) mo.tol = env_tol;
            return cmd_map(mo, args);
        }
        if (*check) {
            if (env_tol > 0.0 && check->count("--tol") == 0) co.tol = env_tol;
            return cmd_check(co, args);
        }
        if (*sim) {
            if (sim->count("--horizon")) so.horizon = horizon;
            return cmd_simulate(so, args);
        }
        return cmd_verify(suite, vseed, vout, args);
    } catch (const ToleranceError& e) {
        std::cerr << "tolerance failure: " << e.what() << " (achieved " << e.achieved() << ")\n";
        return kTolerance;
    } catch (const DomainError& e) {
        std::cerr << "domain violation: " << e.what() << "\n";
        return kDomain;
    } catch (const Unsupported& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return kDomain;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kParse;
    } catch (const Json::exception& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace ssd::cli
