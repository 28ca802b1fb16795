#include "doctest.h"
#include "ssd/grid.hpp"
#include "ssd/spec_json.hpp"

#include <filesystem>
#include <fstream>

using namespace ssd;

namespace {

double cumulant_gap(const LevyTriplet& a, const LevyTriplet& b) {
    double worst = 0.0;
    for (const auto& z : axis_grid(a.dim(), 5.0, 21))
        worst = std::max(worst, std::abs(cumulant(a, z, 1e-13).value - cumulant(b, z, 1e-13).value));
    return worst;
}

const char* kMixed = R"({
  "gauss": [[1.5]],
  "drift": [0.3],
  "levy": [
    {"kind": "atoms", "points": [{"x": [1.0], "w": 1.0}, {"x": [-3.0], "w": 0.5}]},
    {"kind": "lattice", "direction": [1.0], "base": 2.0, "anchor": 1.0,
     "mass": [{"type": "geometric", "w": 1.0, "q": 1.0, "lo": null, "hi": 0},
              {"type": "geometric", "w": 1.0, "q": 0.5, "lo": 1, "hi": null}]}
  ]
})";

}  // namespace

TEST_CASE("triplet parses and round-trips through JSON") {
    const auto t = triplet_from_json(Json::parse(kMixed));
    CHECK(t.dim() == 1);
    CHECK(t.A(0, 0) == 1.5);
    CHECK(t.nu.atoms.size() == 2);
    REQUIRE(t.nu.lattices.size() == 1);
    CHECK(t.nu.lattices[0].mass.at(-40) == doctest::Approx(1.0));
    CHECK(t.nu.lattices[0].mass.at(3) == doctest::Approx(0.125));

    const auto j = triplet_to_json(t);
    const auto back = triplet_from_json(j);
    CHECK(cumulant_gap(t, back) <= 1e-14);
    CHECK(triplet_to_json(back).dump() == j.dump());
    CHECK(spec_hash(j) == spec_hash(triplet_to_json(back)));
}

TEST_CASE("2-D specs, radial families and power masses round-trip") {
    const auto j = Json::parse(R"({
      "drift": [0.0, 0.1],
      "levy": [
        {"kind": "lattice", "direction": [0.6, 0.8], "base": 10.0,
         "mass": [{"type": "power", "w": 1.0, "p": 3.0, "lo": 1}, {"type": "point", "k": 0, "w": 2.0}]},
        {"kind": "radial", "family": "tempered_stable", "direction": [1.0, 0.0], "w": 1.0, "alpha": 0.7, "lambda": 1.0},
        {"kind": "radial", "family": "k_difference", "direction": [0.0, 1.0], "b": 2.0,
         "k": {"type": "exp", "a": 1.0, "lambda": 1.0}}
      ]})");
    const auto t = triplet_from_json(j);
    CHECK(t.dim() == 2);
    CHECK(t.nu.radials.size() == 2);
    CHECK(t.nu.lattices[0].mass.at(2) == doctest::Approx(0.125));
    const auto back = triplet_from_json(triplet_to_json(t));
    CHECK(triplet_to_json(back).dump() == triplet_to_json(t).dump());
}

TEST_CASE("semistable component matches the library construction") {
    const auto t = triplet_from_json(Json::parse(
        R"({"dim": 1, "levy": [{"kind": "semistable", "b": 2.0, "alpha": 1.5, "directions": [{"xi": [1.0], "w": 1.0}]}]})"));
    SemiStableSpec s;
    s.b = 2.0;
    s.alpha = 1.5;
    s.directions = {{Vec::Constant(1, 1.0), 1.0}};
    CHECK(cumulant_gap(t, semi_stable_triplet(s)) <= 1e-13);
}

TEST_CASE("malformed specs are InvalidArgument") {
    CHECK_THROWS_AS(triplet_from_json(Json::parse(R"({"levy": []})")), InvalidArgument);
    CHECK_THROWS_AS(triplet_from_json(Json::parse(R"({"drift": [0], "levy": [{"kind": "blob"}]})")), InvalidArgument);
    CHECK_THROWS_AS(triplet_from_json(Json::parse(R"({"drift": [0], "gauss": [[1, 2]]})")), InvalidArgument);
    CHECK_THROWS_AS(triplet_from_json(Json::parse(R"({"drift": "x"})")), InvalidArgument);
    // valid syntax, invalid law
    CHECK_THROWS_AS(triplet_from_json(Json::parse(R"({"drift": [0], "gauss": [[-1]]})")), InvalidArgument);
    CHECK_THROWS_AS(triplet_from_json(Json::parse(
                        R"({"drift": [0], "levy": [{"kind": "atoms", "points": [{"x": [1], "w": -1}]}]})")),
                    InvalidArgument);
    CHECK_NOTHROW(triplet_from_json(
        Json::parse(R"({"drift": [0], "levy": [{"kind": "atoms", "points": [{"x": [1], "w": -1}]}]})"), false));
}

TEST_CASE("FNV-1a reference values") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("atomic writes and CSV layout") {
    const auto dir = std::filesystem::temp_directory_path() / "ssd_spec_json_test";
    std::filesystem::remove_all(dir);
    const auto p = dir / "sub" / "x.csv";
    std::vector<Vec> grid = {Vec::Constant(1, 0.0), Vec::Constant(1, 1.0)};
    std::vector<Bounded<Complex>> vals = {{Complex(0, 0), 0.0}, {Complex(-0.5, 0.25), 1e-13}};
    write_file_atomic(p, cumulant_csv(grid, vals, {{"b", "2"}}));
    CHECK(!std::filesystem::exists(dir / "sub" / "x.csv.tmp"));
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    CHECK(line == "# b=2");
    std::getline(in, line);
    CHECK(line == "z1,re,im,err");
    std::getline(in, line);
    std::getline(in, line);
    CHECK(line.rfind("1,-0.5,0.25,", 0) == 0);
    CHECK(std::stod(line.substr(12)) == 1e-13);
    std::filesystem::remove_all(dir);
}
