#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mreit {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double ms = 0.0;
};

struct SelftestOptions {
  std::uint64_t seed = 20240607;
  std::filesystem::path scratch;  // empty: a fresh directory under the system temp dir
};

// Property suites: mesh invariants, patch test, weak-divergence identity, flux
// balance, noise determinism, file round-trips and small end-to-end runs.
std::vector<CheckResult> run_selftest(const SelftestOptions& options = {});

}  // namespace mreit
