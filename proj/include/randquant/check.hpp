#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace randquant::check {

struct CheckResult {
  std::string id;
  bool passed = false;
  std::string detail;
};

struct CheckOptions {
  std::uint64_t seed = 1;
  std::uint64_t harmonic_scan_max = 1'000'000;
  std::uint64_t mc_trials = 100'000;
  std::uint64_t offset_trials = 10'000;
  unsigned threads = 1;
  /// Replaces the Euler-Mascheroni constant inside the harmonic-bound check;
  /// exists so a corrupted constant is provably caught.
  std::optional<double> gamma_override;
};

/// Verifies 1/(24(n+1)^2) <= H_n - gamma - ln(n + 1/2) <= 1/(24 n^2) for
/// every n in 1..n_max. The margin of this inequality shrinks like 1/(24n^3)
/// (~4e-20 at n = 10^6), far below double precision, so the scan runs in
/// 128-bit arithmetic independent of the double-precision harmonic().
CheckResult check_harmonic_bounds(std::uint64_t n_max,
                                  std::optional<double> gamma_override = {});

/// Every module invariant, in a fixed order. All results carry stable ids.
std::vector<CheckResult> run_all(const CheckOptions& options = {});

}  // namespace randquant::check
