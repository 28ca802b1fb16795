#pragma once

#include "ssd/iterate.hpp"
#include "ssd/ou_sim.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ssd {

using Json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "ssd-spec/1";

/// Parses {"gauss": [[...]], "drift": [...], "levy": [...]}; see schema/triplet.schema.json.
/// Throws InvalidArgument on anything malformed, and unless check is false also when the
/// result is not a valid Levy triplet.
LevyTriplet triplet_from_json(const Json& j, bool check = true);
Json triplet_to_json(const LevyTriplet& t);

Json mass_to_json(const LatticeMass& m);
LatticeMass mass_from_json(const Json& j);

/// FNV-1a 64-bit hash of the canonical serialization, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);
std::string spec_hash(const Json& j);

Json certificate_to_json(const MembershipCertificate& c);
Json semistable_fit_to_json(const SemiStableFit& f);
Json vec_to_json(const Vec& v);
Vec vec_from_json(const Json& j);

/// Reads a JSON file; parse failures are InvalidArgument.
Json read_json_file(const std::filesystem::path& p);

/// Writes via a temporary file in the same directory followed by rename.
void write_file_atomic(const std::filesystem::path& p, const std::string& content);

/// CSV with a "# key=value" header block.
std::string cumulant_csv(const std::vector<Vec>& grid, const std::vector<Bounded<Complex>>& values,
                         const std::vector<std::pair<std::string, std::string>>& header);
std::string batch_csv(const SampleBatch& b, const std::string& spec_hash, const std::string& manifest);
std::string path_csv(const std::vector<OUPath>& paths, const std::string& manifest);

}  // namespace ssd
