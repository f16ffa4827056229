#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spmb/corrector.hpp"
#include "spmb/potentials.hpp"

namespace spmb {

// Validated user-facing run parameters; every output embeds hash + seed.
struct RunConfig {
  double p = 3.0;
  // Capped default: exactly a/r^m at every bump separation, which keeps the
  // asymptotic-counterpart comparisons sharp.
  PotentialModel potential{1.0, 2.0, PotentialVariant::CappedPower, 1.0};
  double beta = 0.3;             // window half-width factor, 0 < beta < m/pi
  // Small enough for desk-scale sweeps, large enough that the whole radius
  // window S_k stays in the well-separated ring regime (min gap >= 6).
  std::vector<int> k_list = {25, 50, 100};
  int r_samples = 48;            // landscape resolution over S_k
  double rel_tol = 1e-7;
  std::uint64_t budget = 0;      // quadrature evaluation cap, 0 = unlimited
  BasisSpec basis;
  bool corrector = true;         // corrector columns in sweeps
  std::filesystem::path cache_dir = ".spmb-cache";
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 12345;
};

// Parse + validate a JSON config file.  Missing keys take defaults, unknown
// keys are rejected, invariant violations throw ConfigInvalid with the field
// name in the message.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text);

// Canonical serialization (sorted keys, fixed float format) and its FNV-1a
// hash; both deterministic across runs.
std::string canonical_config(const RunConfig& config);
std::string config_hash(const RunConfig& config);

std::string potential_variant_name(PotentialVariant variant);

} // namespace spmb
