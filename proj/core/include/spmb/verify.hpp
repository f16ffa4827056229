#pragma once

#include <string>
#include <vector>

#include "spmb/runconfig.hpp"

namespace spmb {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured quantity
  double threshold = 0.0;  // bound it is compared against
  std::string detail;      // comparison summary or propagated error
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_passed = false;
};

// Run the full invariant/property suite in dependency order.  Module errors
// (including QuadratureBudgetExceeded under a tight config budget) surface as
// failed checks, never as exceptions.
VerifyReport run_verify(const RunConfig& config);

// Deterministic JSON serialization embedding config hash, tool version and
// seed; identical configs produce byte-identical reports.
std::string report_json(const VerifyReport& report, const RunConfig& config);

} // namespace spmb
