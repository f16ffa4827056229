#include "spmb/numerics.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace spmb {

double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

double simpson_uniform(std::span<const double> v, double h) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * h * (v[0] + v[1]);
  std::size_t m = n;        // number of samples used by the Simpson part
  double extra = 0.0;
  if (n % 2 == 0) {         // odd interval count: peel a 3/8 segment off the end
    if (n >= 4) {
      extra = 3.0 * h / 8.0 * (v[n - 4] + 3.0 * v[n - 3] + 3.0 * v[n - 2] + v[n - 1]);
      m = n - 3;
    } else {
      return 0.5 * h * (v[0] + v[1]) + 0.5 * h * (v[1] + v[2]);
    }
  }
  std::vector<double> terms;
  terms.reserve(m);
  terms.push_back(v[0]);
  for (std::size_t i = 1; i + 1 < m; ++i)
    terms.push_back((i % 2 == 1 ? 4.0 : 2.0) * v[i]);
  terms.push_back(v[m - 1]);
  return h / 3.0 * pairwise_sum(terms) + extra;
}

std::pair<double, double> linear_fit(std::span<const double> x,
                                     std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2)
    throw std::invalid_argument("linear_fit: need two equal-length samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  const double b = (n * sxy - sx * sy) / denom;
  const double a = (sy - b * sx) / n;
  return {a, b};
}

namespace {

GaussLegendre compute_gauss_legendre(int order) {
  GaussLegendre gl;
  gl.nodes.resize(order);
  gl.weights.resize(order);
  // Newton iteration from the Chebyshev initial guess.
  for (int i = 0; i < order; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    for (int it = 0; it < 100; ++it) {
      // Evaluate P_n and P_n' by recurrence.
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= order; ++j) {
        double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      const double dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int j = 2; j <= order; ++j) {
      double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    const double dp = order * (x * p1 - p0) / (x * x - 1.0);
    gl.nodes[order - 1 - i] = x;
    gl.weights[order - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return gl;
}

} // namespace

const GaussLegendre& gauss_legendre(int order) {
  static std::mutex mu;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end())
    it = cache.emplace(order, compute_gauss_legendre(order)).first;
  return it->second;
}

double interp_cubic_uniform(std::span<const double> v, double h, double x) {
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  if (n < 4) return v[0];
  double t = x / h;
  if (t <= 0.0) return v[0];
  if (t >= static_cast<double>(n - 1)) return v[n - 1];
  std::size_t i = static_cast<std::size_t>(t);
  // Center the 4-point stencil.
  std::size_t i0 = (i == 0) ? 0 : i - 1;
  if (i0 + 3 >= n) i0 = n - 4;
  const double s = t - static_cast<double>(i0);
  // Lagrange basis at offsets 0,1,2,3.
  const double l0 = -(s - 1) * (s - 2) * (s - 3) / 6.0;
  const double l1 = s * (s - 2) * (s - 3) / 2.0;
  const double l2 = -s * (s - 1) * (s - 3) / 2.0;
  const double l3 = s * (s - 1) * (s - 2) / 6.0;
  return l0 * v[i0] + l1 * v[i0 + 1] + l2 * v[i0 + 2] + l3 * v[i0 + 3];
}

double legendre_p(int l, double x) {
  switch (l) {
    case 0: return 1.0;
    case 1: return x;
    case 2: return 0.5 * (3 * x * x - 1);
    case 3: return 0.5 * x * (5 * x * x - 3);
    case 4: return 0.125 * ((35 * x * x - 30) * x * x + 3);
    default: throw std::invalid_argument("legendre_p: l out of range");
  }
}

double legendre_dp(int l, double x) {
  switch (l) {
    case 0: return 0.0;
    case 1: return 1.0;
    case 2: return 3.0 * x;
    case 3: return 1.5 * (5 * x * x - 1);
    case 4: return 0.5 * x * (35 * x * x - 15);
    default: throw std::invalid_argument("legendre_dp: l out of range");
  }
}

} // namespace spmb
