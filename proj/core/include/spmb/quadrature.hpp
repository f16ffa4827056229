#pragma once

#include <atomic>
#include <cstdint>
#include <functional>

namespace spmb {

// Shared evaluation budget for adaptive quadratures.  charge() throws
// QuadratureBudgetExceeded once the cap is hit; a cap of 0 means unlimited.
class QuadratureBudget {
 public:
  explicit QuadratureBudget(std::uint64_t cap = 0) : cap_(cap), used_(0) {}

  void charge(std::uint64_t n);
  std::uint64_t used() const { return used_.load(std::memory_order_relaxed); }
  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t cap_;
  std::atomic<std::uint64_t> used_;
};

// Adaptive Simpson on [a, b] to relative tolerance rel_tol (with abs floor
// abs_tol to terminate on negligible integrals).
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol, double abs_tol,
                          QuadratureBudget& budget, int max_depth = 40);

// Iterated 2D integral: \int_{ax}^{bx} \int_{ay(x)}^{by(x)} f(x,y) dy dx,
// adaptive in both directions.
double integrate_2d(const std::function<double(double, double)>& f, double ax,
                    double bx, const std::function<double(double)>& ay,
                    const std::function<double(double)>& by, double rel_tol,
                    double abs_tol, QuadratureBudget& budget);

// Fixed-order Gauss-Legendre on [a, b].
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int order, QuadratureBudget& budget);

// Panelled Gauss-Legendre: [a, b] split into n_panels equal pieces, `order`
// points each.  Deterministic cost, good for smooth exponentially-localized
// integrands.
double integrate_gl_panels(const std::function<double(double)>& f, double a,
                           double b, int n_panels, int order,
                           QuadratureBudget& budget);

} // namespace spmb
