#pragma once

/// @file cli.hpp
/// @brief Command-line front end, callable in-process.
///
/// Exit codes: 0 ok, 1 domain error, 2 usage error, 3 I/O error.

#include <iosfwd>
#include <string>
#include <vector>

namespace curator {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace curator
