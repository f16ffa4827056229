#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace spmb {

// Tree (pairwise) summation; accumulation error O(log n) instead of O(n).
double pairwise_sum(std::span<const double> values);

// Composite Simpson on a uniform grid of n samples with step h (n >= 2).
// Odd trailing interval handled with a 3/8 rule segment.
double simpson_uniform(std::span<const double> values, double h);

// Least-squares line y = a + b x; returns {a, b}.
std::pair<double, double> linear_fit(std::span<const double> x,
                                     std::span<const double> y);

// Gauss-Legendre nodes/weights on [-1, 1], computed once per order and cached.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int order);

// 4-point Lagrange interpolation on a uniform grid starting at 0 with step h.
// Out-of-range x is clamped to the grid.
double interp_cubic_uniform(std::span<const double> values, double h, double x);

// Legendre polynomial P_l and derivative P_l' at x, l <= 4.
double legendre_p(int l, double x);
double legendre_dp(int l, double x);

} // namespace spmb
