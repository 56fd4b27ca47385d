#pragma once

#include <iosfwd>
#include <string>

namespace ddsddp {

inline constexpr const char* kVersion = "0.1.0";

/// Entry point of the ddsddp tool. Exit codes: 0 success/converged,
/// 2 iteration limit without convergence, 1 error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace ddsddp
