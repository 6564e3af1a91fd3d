#pragma once

// Command-line front end: eval, verify, suite, audit, limits, sweep.
//
// Exit codes: 0 no failing verdict, 1 at least one failing verdict,
// 2 configuration or domain error.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qzeta/real.hpp"

namespace qzeta::cli {

inline constexpr const char* kSchemaVersion = "1";
inline constexpr std::uint64_t kMaxSweepPoints = 100'000;
inline constexpr const char* kPrecisionEnv = "QZETA_PREC_BITS";

enum ExitCode : int { kOk = 0, kFailVerdict = 1, kError = 2 };

/// Significant digits written for a value computed at `precision_bits`:
/// ceil(0.301 bits) - 5.
int report_digits(Bits precision_bits);

/// Runs one invocation. `args` excludes the program name. The report goes to
/// `out` unless --output is given, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qzeta::cli
