#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace qpat::cli {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int {
    exit_ok = 0,
    exit_check_failed = 1,
    exit_input = 2,
    exit_degenerate = 3,
    exit_solver = 4,
};

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes);

/// Runs `qpat <args...>` (args excludes the program name). Reports go to `out`,
/// progress and errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qpat::cli
