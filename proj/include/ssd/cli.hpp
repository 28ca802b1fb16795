#pragma once

#include <string>
#include <vector>

namespace ssd::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kNegative = 1;  // negative verdict of any command
inline constexpr int kParse = 2;
inline constexpr int kDomain = 3;
inline constexpr int kTolerance = 4;
inline constexpr int kIo = 5;

/// args excludes the program name.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace ssd::cli
