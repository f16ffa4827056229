#include "spmb/geometry.hpp"

#include <cmath>
#include <string>

#include "spmb/errors.hpp"
#include "spmb/numerics.hpp"

namespace spmb {

double BumpConfiguration::min_gap() const {
  return 2.0 * r * std::sin(M_PI / k);
}

BumpConfiguration bump_positions(int k, double r) {
  if (k < 2) throw InvalidCount("bump_positions: need k >= 2");
  if (r <= 0.0) throw Error("bump_positions: need r > 0");
  BumpConfiguration cfg;
  cfg.k = k;
  cfg.r = r;
  cfg.positions.resize(k);
  for (int j = 0; j < k; ++j) {
    const double phi = 2.0 * M_PI * j / k;
    cfg.positions[j] = {r * std::cos(phi), r * std::sin(phi), 0.0};
  }
  return cfg;
}

double pairwise_distance(int k, double r, int i, int j) {
  if (i < 1 || i > k || j < 1 || j > k)
    throw IndexOutOfRange("pairwise_distance: indices must lie in [1, k]");
  return 2.0 * r * std::abs(std::sin((i - j) * M_PI / k));
}

InverseDistanceSum inverse_distance_sum(int k, double r) {
  if (k < 2) throw InvalidCount("inverse_distance_sum: need k >= 2");
  // Folded half-sine form: terms i and k-i coincide, the antipodal term (even
  // k) appears once with sin = 1.
  const int half = (k - 1) / 2;
  std::vector<double> terms(half);
  for (int i = 1; i <= half; ++i)
    terms[i - 1] = 1.0 / std::sin(i * M_PI / k);
  double s = pairwise_sum(terms);
  if (k % 2 == 0) s += 0.5;
  InverseDistanceSum out;
  out.exact = s / r;
  out.asymptotic = k / (M_PI * r) * std::log(static_cast<double>(k));
  return out;
}

RadiusWindow radius_window(double m, double beta, int k) {
  if (k < 2) throw InvalidCount("radius_window: need k >= 2");
  if (!(beta > 0.0) || beta >= m / M_PI)
    throw InvalidBeta("radius_window: need 0 < beta < m/pi = " +
                      std::to_string(m / M_PI));
  RadiusWindow w;
  w.m = m;
  w.beta = beta;
  w.k = k;
  const double klogk = k * std::log(static_cast<double>(k));
  w.lo = (m / M_PI - beta) * klogk;
  w.hi = (m / M_PI + beta) * klogk;
  return w;
}

} // namespace spmb
