#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace liefm {

struct SelfcheckOptions {
  /// Perturb sinc inside the SE(2) exponential (test hook; the SE(2)
  /// roundtrip checks must then fail).
  bool inject_sinc_fault = false;
  std::uint64_t seed = 1;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  /// Measured value and the threshold it was compared against.
  double value = 0.0;
  double threshold = 0.0;
};

/// Fast property suite: exp/log roundtrips, the exponential-curve identity,
/// conditional-field integration, translation-group reduction and a
/// finite-difference gradient check.
std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& options = {});

/// Prints one line per check; returns the number of failures.
int print_selfcheck(std::ostream& out, const std::vector<CheckResult>& results);

}  // namespace liefm
