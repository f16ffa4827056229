#pragma once

namespace spmb {

inline constexpr const char* kToolVersion = "0.1.0";

// Bump when the ground-state integrator changes in any value-affecting way;
// part of the profile cache key.
inline constexpr int kIntegratorVersion = 1;

} // namespace spmb
