#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace liefm::cli {

/// Exit codes besides 0 (success) and CLI11's own parse-error codes.
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitParse = 4;
inline constexpr int kExitIo = 5;

/**
 * Entry point shared by the `liefm` binary and the tests. `args` excludes the
 * program name, e.g. {"train", "--group", "se2", "--out", "runs/se2"}.
 *
 * Subcommands: train, flow, eval, selfcheck. Every subcommand accepts
 * `--config <file>` with flat `key = value` lines named like the long flags;
 * flags given on the command line win over the file. Unknown keys are errors.
 */
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace liefm::cli
