#pragma once

#include <iosfwd>

namespace simota::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;

/// Parses argv and runs one subcommand. Never throws; errors are printed
/// to `err` and mapped to exit codes (2 input validation, 3 numeric).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace simota::cli
