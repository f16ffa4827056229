#pragma once

#include <array>
#include <vector>

namespace spmb {

using Point3 = std::array<double, 3>;

struct BumpConfiguration {
  int k = 0;
  double r = 0.0;
  std::vector<Point3> positions;

  double min_gap() const;  // nearest-neighbor distance 2 r sin(pi/k)
};

BumpConfiguration bump_positions(int k, double r);

// Eq: |P_i - P_j| = 2 r |sin((i-j) pi / k)|, 1-based indices.
double pairwise_distance(int k, double r, int i, int j);

struct InverseDistanceSum {
  double exact;       // sum over i=2..k of 1/|P_1 - P_i|
  double asymptotic;  // (k / (pi r)) log k
};

InverseDistanceSum inverse_distance_sum(int k, double r);

struct RadiusWindow {
  double m = 0.0;
  double beta = 0.0;
  int k = 0;
  double lo = 0.0;
  double hi = 0.0;
};

RadiusWindow radius_window(double m, double beta, int k);

} // namespace spmb
