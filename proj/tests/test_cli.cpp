#include "doctest.h"
#include "ssd/cli.hpp"
#include "ssd/spec_json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ssd;
namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "ssd_cli_test";

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string spec(const std::string& name, const std::string& body) {
    fs::create_directories(kDir);
    const auto p = kDir / (name + ".json");
    std::ofstream(p) << body;
    return p.string();
}

std::string out(const std::string& name) { return (kDir / name).string(); }

int run(std::vector<std::string> args) { return cli::run(args); }

const char* kGauss = R"({"gauss": [[1.0]], "drift": [0.0]})";
const char* kCp = R"({"drift": [0.0], "levy": [{"kind": "atoms", "points": [{"x": [1.0], "w": 1.0}]}]})";
const char* kSemi = R"({"dim": 1, "levy": [{"kind": "semistable", "b": 2, "alpha": 1, "directions": [{"xi": [1.0], "w": 1.0}]}]})";

std::string power_lattice(int p) {
    return R"({"drift": [0.0], "levy": [{"kind": "lattice", "direction": [1.0], "base": 10, "mass": [{"type": "power", "w": 1, "p": )" +
           std::to_string(p) + R"(, "lo": 1}]}]})";
}

// value column at z = 1 of a cumulant CSV
Complex csv_at_one(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("1,", 0) == 0) {
            std::stringstream ss(line);
            std::string z, re, im;
            std::getline(ss, z, ',');
            std::getline(ss, re, ',');
            std::getline(ss, im, ',');
            return {std::stod(re), std::stod(im)};
        }
    FAIL("z = 1 not on the grid");
    return {};
}

}  // namespace

TEST_CASE("map: forward, inverse roundtrip and iterated value") {
    const auto g = spec("gauss", kGauss);
    REQUIRE(run({"map", g, "--b", "2", "--out", out("fwd")}) == cli::kOk);
    const auto t = read_json_file(kDir / "fwd" / "triplet.json");
    CHECK(t.at("gauss")[0][0].get<double>() == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(csv_at_one(kDir / "fwd" / "cumulant.csv").real() == doctest::Approx(-2.0 / 3.0).epsilon(1e-14));

    REQUIRE(run({"map", out("fwd") + "/triplet.json", "--b", "2", "--inverse", "--out", out("inv")}) == cli::kOk);
    const auto back = triplet_from_json(read_json_file(kDir / "inv" / "triplet.json"));
    CHECK(std::abs(back.A(0, 0) - 1.0) <= 1e-15);
    CHECK(back.nu.empty());

    REQUIRE(run({"map", g, "--b", "2", "--m", "1", "--out", out("m1")}) == cli::kOk);
    CHECK(std::abs(csv_at_one(kDir / "m1" / "cumulant.csv") - Complex(-8.0 / 9.0, 0.0)) <= 1e-10);
}

TEST_CASE("exit codes") {
    const auto g = spec("gauss", kGauss);
    const auto cp = spec("cp", kCp);
    // parse errors
    CHECK(run({"map", spec("broken", "{\"gauss\": ["), "--b", "2", "--out", out("x")}) == cli::kParse);
    CHECK(run({"map", spec("schema", R"({"drift": [0], "levy": [{"kind": "nope"}]})"), "--b", "2", "--out", out("x")}) ==
          cli::kParse);
    CHECK(run({"map", spec("neg", R"({"drift": [0], "gauss": [[-1]]})"), "--b", "2", "--out", out("x")}) == cli::kParse);
    CHECK(run({"map", g, "--out", out("x")}) == cli::kParse);
    CHECK(run({"map", g, "--b", "1", "--out", out("x")}) == cli::kParse);
    CHECK(run({"frobnicate"}) == cli::kParse);
    // domain: first log-moment infinite
    CHECK(run({"map", spec("k2", power_lattice(2)), "--b", "10", "--out", out("x")}) == cli::kDomain);
    // tolerance: the k^-3 tail bound cannot reach the default tolerance
    CHECK(run({"map", spec("k3", power_lattice(3)), "--b", "10", "--out", out("x")}) == cli::kTolerance);
    // invalid inverse
    CHECK(run({"map", cp, "--b", "2", "--inverse", "--out", out("x")}) == cli::kNegative);
    // environment overrides are validated
    setenv("SSDTOOL_TOL", "-3", 1);
    CHECK(run({"check", g, "--b", "2", "--out", out("x")}) == cli::kParse);
    setenv("SSDTOOL_TOL", "1e-2", 1);
    CHECK(run({"map", spec("k3", power_lattice(3)), "--b", "10", "--out", out("x")}) == cli::kOk);
    unsetenv("SSDTOOL_TOL");
    setenv("SSDTOOL_THREADS", "two", 1);
    CHECK(run({"check", g, "--b", "2", "--out", out("x")}) == cli::kParse);
    unsetenv("SSDTOOL_THREADS");
}

TEST_CASE("check verdicts") {
    CHECK(run({"check", spec("semi", kSemi), "--b", "2", "--level", "0", "--out", out("c_semi")}) == cli::kOk);
    CHECK(run({"check", spec("semi", kSemi), "--b", "2", "--semistable", "--out", out("c_semi2")}) == cli::kOk);
    REQUIRE(run({"check", spec("cp", kCp), "--b", "2", "--out", out("c_cp")}) == cli::kNegative);
    const auto cert = read_json_file(kDir / "c_cp" / "certificate.json");
    CHECK_FALSE(cert.at("verdict").get<bool>());
    CHECK(cert.at("violation").at("mass").get<double>() < 0.0);
    CHECK(cert.at("clipped_residual").get<double>() > 0.1);
    for (int m = 0; m <= kMaxIterLevel; ++m)
        CHECK(run({"check", spec("gauss", kGauss), "--b", "2", "--level", std::to_string(m), "--out", out("c_g")}) ==
              cli::kOk);
    CHECK(run({"check", spec("gauss", kGauss), "--b", "2", "--level", "9", "--out", out("c_g")}) == cli::kParse);
}

TEST_CASE("simulate reports and path files") {
    const auto g = spec("gauss", kGauss);
    REQUIRE(run({"simulate", g, "--b", "2", "--c", "1", "--steps", "60", "--paths", "100000", "--init", "zero",
                 "--seed", "3", "--out", out("sim")}) == cli::kOk);
    const auto rep = read_json_file(kDir / "sim" / "report.json");
    CHECK(rep.at("pass").get<bool>());
    CHECK(rep.at("ecf").at("max_dev_transition").get<double>() < rep.at("ecf").at("radius").get<double>());
    CHECK(rep.at("langevin").at("max_rel").get<double>() <= 1e-10);

    REQUIRE(run({"simulate", spec("cp", kCp), "--b", "2", "--c", "2", "--steps", "20", "--paths", "20000", "--init",
                 "limit", "--out", out("sim_lim")}) == cli::kOk);
    CHECK(read_json_file(kDir / "sim_lim" / "report.json").at("stationarity").at("pass").get<bool>());

    // less than one epoch: the path is M
    REQUIRE(run({"simulate", g, "--b", "2", "--horizon", "0.5", "--paths", "10", "--init", "const", "--m0", "2.5",
                 "--out", out("sim0")}) == cli::kOk);
    std::ifstream in(kDir / "sim0" / "paths.csv");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line[0] == '#' || line[0] == 'p') continue;
        ++rows;
        CHECK(line.find(",0,0,2.5,0") != std::string::npos);
    }
    CHECK(rows == 10);

    CHECK(run({"simulate", spec("k2", power_lattice(2)), "--b", "10", "--steps", "5", "--paths", "10", "--init", "limit",
               "--out", out("x")}) == cli::kDomain);
    CHECK(run({"simulate", spec("k2", power_lattice(2)), "--b", "10", "--steps", "5", "--paths", "10",
               "--semistationary", "--out", out("x")}) == cli::kDomain);
    CHECK(run({"simulate", g, "--b", "2", "--init", "const", "--out", out("x")}) == cli::kParse);
}

TEST_CASE("outputs are deterministic and name their manifest") {
    const auto cp = spec("cp", kCp);
    const std::vector<std::string> sim = {"simulate", cp, "--b", "2", "--steps", "10", "--paths", "2000",
                                          "--seed", "11", "--out", out("det")};
    const std::vector<std::string> map = {"map", cp, "--b", "2", "--out", out("detm")};
    REQUIRE(run(sim) == cli::kOk);
    REQUIRE(run(map) == cli::kOk);
    const auto r1 = slurp(kDir / "det" / "report.json");
    const auto p1 = slurp(kDir / "det" / "paths.csv");
    const auto t1 = slurp(kDir / "detm" / "triplet.json");
    const auto c1 = slurp(kDir / "detm" / "cumulant.csv");
    REQUIRE(run(sim) == cli::kOk);
    REQUIRE(run(map) == cli::kOk);
    CHECK(slurp(kDir / "det" / "report.json") == r1);
    CHECK(slurp(kDir / "det" / "paths.csv") == p1);
    CHECK(slurp(kDir / "detm" / "triplet.json") == t1);
    CHECK(slurp(kDir / "detm" / "cumulant.csv") == c1);

    for (const char* d : {"det", "detm"}) {
        auto man = read_json_file(kDir / d / "manifest.json");
        const auto h = man.at("hash").get<std::string>();
        // the hash covers everything except the hash itself and the timing block
        man.erase("hash");
        man.erase("timing");
        CHECK(spec_hash(man) == h);
        for (const auto& e : fs::directory_iterator(kDir / d))
            if (e.path().filename() != "manifest.json") CHECK(slurp(e.path()).find(h) != std::string::npos);
        const auto args = man.at("args").get<std::vector<std::string>>();
        CHECK(args == (std::string(d) == "det" ? sim : map));
    }
}

TEST_CASE("verify") {
    CHECK(run({"verify", "--suite", "iterate", "--out", out("verify_it.json")}) == cli::kOk);
    const auto s = read_json_file(kDir / "verify_it.json");
    CHECK(s.at("pass").get<bool>());
    CHECK(s.at("checks").size() >= 10);
    CHECK(run({"verify", "--suite", "bogus"}) == cli::kParse);
}
