#pragma once

#include "ssd/triplet.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ssd {

/// Test laws for d = 1 or 2. The lattice member has finite log-moments of every order.
/// The lattice uses the span b as its base so that forward images stay exact.
std::vector<LevyTriplet> reference_corpus(int d, double b);

struct CheckResult {
    std::string suite;
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    std::string relation;  // how value is compared with limit: "<=", ">", "=="
    bool pass = false;
    std::string note;
};

struct SuiteResult {
    std::vector<CheckResult> checks;
    bool pass() const;
};

/// Property suites with fixed sizes: "core", "ou", "iterate" or "all". Randomized checks
/// draw their seeds from `seed`; the result is deterministic for a given seed.
SuiteResult run_suite(const std::string& name, std::uint64_t seed);

}  // namespace ssd
