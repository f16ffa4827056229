#include "spmb/quadrature.hpp"

#include <cmath>
#include <string>

#include "spmb/errors.hpp"
#include "spmb/numerics.hpp"

namespace spmb {

void QuadratureBudget::charge(std::uint64_t n) {
  const std::uint64_t total = used_.fetch_add(n, std::memory_order_relaxed) + n;
  if (cap_ != 0 && total > cap_)
    throw QuadratureBudgetExceeded("quadrature budget exceeded: used " +
                                   std::to_string(total) + " of " +
                                   std::to_string(cap_));
}

namespace {

double adaptive_step(const std::function<double(double)>& f, double a,
                     double b, double fa, double fm, double fb, double whole,
                     double tol, double abs_tol, QuadratureBudget& budget,
                     int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  budget.charge(2);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * std::max(tol, abs_tol))
    return left + right + delta / 15.0;
  return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, abs_tol, budget,
                       depth - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, abs_tol, budget,
                       depth - 1);
}

} // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol, double abs_tol,
                          QuadratureBudget& budget, int max_depth) {
  if (a == b) return 0.0;
  budget.charge(3);
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  // First pass at a coarse estimate of scale; refine against |whole|.
  const double tol = rel_tol * std::abs(whole);
  return adaptive_step(f, a, b, fa, fm, fb, whole, tol, abs_tol, budget,
                       max_depth);
}

double integrate_2d(const std::function<double(double, double)>& f, double ax,
                    double bx, const std::function<double(double)>& ay,
                    const std::function<double(double)>& by, double rel_tol,
                    double abs_tol, QuadratureBudget& budget) {
  // Inner integrals get a tighter tolerance so the outer error dominates.
  const double inner_rel = 0.1 * rel_tol;
  auto outer = [&](double x) {
    return integrate_adaptive([&](double y) { return f(x, y); }, ay(x), by(x),
                              inner_rel, 0.1 * abs_tol, budget);
  };
  return integrate_adaptive(outer, ax, bx, rel_tol, abs_tol, budget);
}

double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int order, QuadratureBudget& budget) {
  const auto& gl = gauss_legendre(order);
  budget.charge(static_cast<std::uint64_t>(order));
  const double c = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < order; ++i)
    s += gl.weights[i] * f(c + hw * gl.nodes[i]);
  return hw * s;
}

double integrate_gl_panels(const std::function<double(double)>& f, double a,
                           double b, int n_panels, int order,
                           QuadratureBudget& budget) {
  std::vector<double> parts(n_panels);
  const double w = (b - a) / n_panels;
  for (int i = 0; i < n_panels; ++i)
    parts[i] = integrate_gl(f, a + i * w, a + (i + 1) * w, order, budget);
  return pairwise_sum(parts);
}

} // namespace spmb
