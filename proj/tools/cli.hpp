#pragma once

#include <iosfwd>

namespace mqed::cli {

enum ExitCode { kOk = 0, kInputError = 2, kNumericalError = 3 };

// Parses argv and runs one subcommand. Reports go to `out` unless --out is
// given; diagnostics go to `err`.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace mqed::cli
