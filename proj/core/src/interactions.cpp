#include "spmb/interactions.hpp"

#include <cmath>
#include <string>

#include "spmb/errors.hpp"
#include "spmb/numerics.hpp"

namespace spmb {

double overlap_integral(const GroundStateProfile& profile, double d, double b1,
                        double b2, double rel_tol, QuadratureBudget& budget) {
  if (b1 < 1.0 || b2 < 1.0)
    throw Error("overlap_integral: need b1, b2 >= 1");
  if (d < 0.0) throw Error("overlap_integral: need d >= 0");
  if (d == 0.0) return integral_moment(profile, b1 + b2);

  // Prolate spheroidal coordinates about the two centers: r1 = d(xi + eta)/2,
  // r2 = d(xi - eta)/2, dV = 2 pi (d/2)^3 (xi^2 - eta^2) dxi deta.
  const double half = 0.5 * d;
  const double bmin = std::min(b1, b2);
  const double xi_max = 1.0 + 80.0 / (d * bmin);
  auto integrand = [&](double xi, double eta) {
    const double r1 = half * (xi + eta);
    const double r2 = half * (xi - eta);
    return std::pow(evaluate_with_tail(profile, r1), b1) *
           std::pow(evaluate_with_tail(profile, r2), b2) *
           (xi * xi - eta * eta);
  };
  // Tensor Gauss-Legendre panels sized to the decay length: the profile
  // factors vary on the unit r-scale, i.e. on scale 2/d in xi and eta.
  const int order = rel_tol < 1e-7 ? 10 : 8;
  const int n_eta = std::max(8, static_cast<int>(std::ceil(d)));
  const int n_xi =
      std::max(8, static_cast<int>(std::ceil((xi_max - 1.0) * d / 2.0)));
  auto inner = [&](double xi) {
    return integrate_gl_panels([&](double eta) { return integrand(xi, eta); },
                               -1.0, 1.0, n_eta, order, budget);
  };
  const double val =
      integrate_gl_panels(inner, 1.0, xi_max, n_xi, order, budget);
  return 2.0 * M_PI * half * half * half * val;
}

double interaction_ep(const GroundStateProfile& profile, double d,
                      double rel_tol, QuadratureBudget& budget) {
  return overlap_integral(profile, d, profile.p, 1.0, rel_tol, budget);
}

double analytic_interaction_constant(const GroundStateProfile& profile) {
  const std::size_t n = profile.size();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = profile.r_at(i);
    g[i] = std::pow(profile.u[i], profile.p) * t * std::sinh(t);
  }
  return profile.c_decay * 4.0 * M_PI * simpson_uniform(g, profile.h);
}

InteractionFit fit_interaction(const GroundStateProfile& profile,
                               double rel_tol, QuadratureBudget& budget,
                               double d_min, double d_max, int n_samples) {
  if (n_samples < 2) throw Error("fit_interaction: need >= 2 samples");
  InteractionFit fit;
  std::vector<double> logs(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const double d = d_min + (d_max - d_min) * i / (n_samples - 1);
    const double v = interaction_ep(profile, d, rel_tol, budget);
    fit.separations.push_back(d);
    fit.values.push_back(v);
    logs[i] = std::log(v * d);
  }
  const auto [icpt, slope] = linear_fit(fit.separations, logs);
  fit.slope = slope;
  // Prefactor from the intercept of the constrained model log(I d) = log C - d.
  double acc = 0.0;
  for (int i = 0; i < n_samples; ++i) acc += logs[i] + fit.separations[i];
  fit.c_star = std::exp(acc / n_samples);
  (void)icpt;
  for (int i = 0; i < n_samples; ++i) {
    const double model =
        fit.c_star * std::exp(-fit.separations[i]) / fit.separations[i];
    fit.fit_residual =
        std::max(fit.fit_residual, std::abs(model / fit.values[i] - 1.0));
  }
  fit.c_analytic = analytic_interaction_constant(profile);
  return fit;
}

double interaction_ep_fast(const InteractionFit& fit, double d) {
  if (fit.c_star <= 0.0)
    throw FitUnavailable("interaction_ep_fast: fit not initialized");
  return fit.c_star * std::exp(-d) / d;
}

double ring_interaction_sum(const GroundStateProfile& profile,
                            const BumpConfiguration& config,
                            const InteractionFit* fit, double rel_tol,
                            QuadratureBudget& budget) {
  const double gap = config.min_gap();
  if (gap < kMinRingGap)
    throw GapTooSmall("ring_interaction_sum: min pairwise gap " +
                      std::to_string(gap) + " < " +
                      std::to_string(kMinRingGap));
  const int k = config.k;
  auto term = [&](double d) {
    if (fit != nullptr && d > kFastModeThreshold)
      return interaction_ep_fast(*fit, d);
    return interaction_ep(profile, d, rel_tol, budget);
  };
  // Fold the symmetric distances d_i = d_{k-i}.
  const int half = (k - 1) / 2;
  std::vector<double> parts;
  parts.reserve(half + 1);
  for (int i = 1; i <= half; ++i)
    parts.push_back(2.0 * term(pairwise_distance(k, config.r, 1, 1 + i)));
  if (k % 2 == 0) parts.push_back(term(2.0 * config.r));
  return pairwise_sum(parts);
}

double ring_sum_model(double C, const BumpConfiguration& config) {
  const int k = config.k;
  const int half = (k - 1) / 2;
  auto model = [&](double d) { return C * std::exp(-d) / d; };
  std::vector<double> parts;
  parts.reserve(half + 1);
  for (int i = 1; i <= half; ++i)
    parts.push_back(2.0 * model(pairwise_distance(k, config.r, 1, 1 + i)));
  if (k % 2 == 0) parts.push_back(model(2.0 * config.r));
  return pairwise_sum(parts);
}

} // namespace spmb
