#pragma once

#include <vector>

#include "spmb/geometry.hpp"
#include "spmb/groundstate.hpp"
#include "spmb/quadrature.hpp"

namespace spmb {

// \int U^{b1}(x) U^{b2}(x - d e_1) dx by two-center (prolate spheroidal)
// quadrature.
double overlap_integral(const GroundStateProfile& profile, double d, double b1,
                        double b2, double rel_tol, QuadratureBudget& budget);

// The Lemma-2.5 interaction \int U^p(x) U(x - d e_1) dx.
double interaction_ep(const GroundStateProfile& profile, double d,
                      double rel_tol, QuadratureBudget& budget);

// Exponential model I(d) ~ C e^{-d}/d fitted over a separation window,
// together with the analytic candidate C = C_U \int U^p e^{y_1} dy.
struct InteractionFit {
  std::vector<double> separations;
  std::vector<double> values;
  double c_star = 0.0;       // prefactor from the least-squares fit
  double slope = 0.0;        // fitted d-slope of log(I(d) d); model: -1
  double fit_residual = 0.0; // max relative model deviation over the window
  double c_analytic = 0.0;
};

InteractionFit fit_interaction(const GroundStateProfile& profile,
                               double rel_tol, QuadratureBudget& budget,
                               double d_min = 8.0, double d_max = 14.0,
                               int n_samples = 7);

// C_U * \int U^p(y) e^{y_1} dy = C_U * 4 pi \int U^p(t) t sinh(t) dt.
double analytic_interaction_constant(const GroundStateProfile& profile);

// Fast-mode evaluation C* e^{-d}/d.
double interaction_ep_fast(const InteractionFit& fit, double d);

// Sum over i = 2..k of interaction_ep at the ring distances; quadrature below
// the fast-mode threshold, fitted model above it.  fit may be null, which
// forces quadrature everywhere.
double ring_interaction_sum(const GroundStateProfile& profile,
                            const BumpConfiguration& config,
                            const InteractionFit* fit, double rel_tol,
                            QuadratureBudget& budget);

// Pure model sum C * sum e^{-d_i}/d_i over the ring distances (the Lemma-2.5
// asymptotic counterpart used by the reduced-energy comparisons).
double ring_sum_model(double C, const BumpConfiguration& config);

inline constexpr double kFastModeThreshold = 12.0;
inline constexpr double kMinRingGap = 6.0;

} // namespace spmb
