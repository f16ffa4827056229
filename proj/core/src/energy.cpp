#include "spmb/energy.hpp"

#include <algorithm>
#include <cmath>

#include "spmb/errors.hpp"
#include "spmb/numerics.hpp"

namespace spmb {

namespace {

BumpConfiguration ring_config(int k, double r) {
  if (k < 1) throw InvalidCount("make_ansatz: need k >= 1");
  if (k == 1) {
    BumpConfiguration cfg;
    cfg.k = 1;
    cfg.r = r;
    cfg.positions = {Point3{r, 0.0, 0.0}};
    return cfg;
  }
  return bump_positions(k, r);
}

double dist(const Point3& x, const Point3& y) {
  const double dx = x[0] - y[0], dy = x[1] - y[1], dz = x[2] - y[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Distinct folded ring distances with multiplicities (d_i = d_{k-i}).
std::vector<std::pair<double, double>> folded_distances(int k, double r) {
  std::vector<std::pair<double, double>> out;
  if (k < 2) return out;
  const int half = (k - 1) / 2;
  for (int i = 1; i <= half; ++i)
    out.emplace_back(pairwise_distance(k, r, 1, 1 + i), 2.0);
  if (k % 2 == 0) out.emplace_back(2.0 * r, 1.0);
  return out;
}

// 4 pi \int U^2 t dt: the r = 0 scale of the single-bump Newton potential.
double bump_potential_scale(const GroundStateProfile& prof) {
  std::vector<double> g(prof.size());
  for (std::size_t i = 0; i < prof.size(); ++i)
    g[i] = prof.u[i] * prof.u[i] * prof.r_at(i);
  return 4.0 * M_PI * simpson_uniform(g, prof.h);
}

// Lemma-2.4 style model bound C e^{-(1-delta) d}/d, delta = 0.1.
double overlap_model_bound(double c, double d) {
  return c * std::exp(-0.9 * d) / d;
}

// The radialized single-bump Poisson source and its Newton potential, shared
// by the diagonal nonlocal term and the residual surrogate.
NewtonPotential bump_phi_table(const MultiBumpAnsatz& ansatz) {
  const auto& prof = *ansatz.profile;
  const double rho = ansatz.config.r;
  auto f = [&](double s) {
    const double u = evaluate_with_tail(prof, s);
    return radialized_potential(ansatz.potential, rho, s) * u * u;
  };
  return NewtonPotential(
      make_density(f, 2e-3, prof.r_max, TailKind::ExpPower, 2.0, -2.0));
}

double pair_coulomb(const RadialDensity& usq, double msq, double d,
                    double rel_tol, QuadratureBudget& budget) {
  // Beyond the fast-mode threshold both densities look like point charges to
  // each other up to exponentially small overlap; Newton's theorem applies.
  if (d > kFastModeThreshold) return msq / d;
  return coulomb_pair_integral(usq, usq, d, rel_tol, budget);
}

struct SectorSpec {
  double s_lo, s_hi, x3_half, theta_half;
  int n_s, n_x3, n_theta, order;
};

SectorSpec sector_spec(const BumpConfiguration& cfg, const QuadratureSpec& q) {
  SectorSpec s;
  s.theta_half = cfg.k == 1 ? M_PI : M_PI / cfg.k;
  s.s_lo = std::max(0.0, cfg.r - q.box_half);
  s.s_hi = cfg.r + q.box_half;
  s.x3_half = q.box_half;
  s.n_s = std::max(2, (int)std::ceil((s.s_hi - s.s_lo) / q.panel_width));
  s.n_x3 = std::max(2, (int)std::ceil(2.0 * s.x3_half / q.panel_width));
  const double arc = 2.0 * s.theta_half * std::max(cfg.r, 1.0);
  s.n_theta = std::max(2, (int)std::ceil(arc / q.panel_width));
  s.order = q.gl_order;
  return s;
}

// \int_{Omega_1} f dx over the symmetry wedge |azimuth| <= pi/k, in
// cylindrical coordinates, tensor Gauss-Legendre panels.
double sector_integral(const BumpConfiguration& cfg, const QuadratureSpec& q,
                       const std::function<double(const Point3&)>& f,
                       QuadratureBudget& budget) {
  double acc = 0.0;
  sector_for_each(
      cfg, q, [&](const Point3& x, double w) { acc += w * f(x); }, budget);
  return acc;
}

// Bump indices kept in truncated pointwise sums: the home bump and n_nb
// neighbors on each side (all of them for small k).
std::vector<const Point3*> kept_bumps(const BumpConfiguration& cfg, int n_nb) {
  std::vector<const Point3*> out;
  const int k = cfg.k;
  if (k <= 2 * n_nb + 1) {
    for (const auto& p : cfg.positions) out.push_back(&p);
    return out;
  }
  for (int j = -n_nb; j <= n_nb; ++j)
    out.push_back(&cfg.positions[(j + k) % k]);
  return out;
}

}  // namespace

void sector_for_each(const BumpConfiguration& config, const QuadratureSpec& spec,
                     const std::function<void(const Point3&, double)>& fn,
                     QuadratureBudget& budget) {
  const SectorSpec s = sector_spec(config, spec);
  const auto& gl = gauss_legendre(s.order);
  const double ws = (s.s_hi - s.s_lo) / s.n_s;
  const double wt = 2.0 * s.theta_half / s.n_theta;
  const double wx = 2.0 * s.x3_half / s.n_x3;
  budget.charge(static_cast<std::uint64_t>(s.n_s) * s.n_theta * s.n_x3 *
                s.order * s.order * s.order);
  for (int is = 0; is < s.n_s; ++is) {
    for (int js = 0; js < s.order; ++js) {
      const double sigma =
          s.s_lo + ws * (is + 0.5 + 0.5 * gl.nodes[js]);
      const double w_sigma = 0.5 * ws * gl.weights[js] * sigma;
      for (int it = 0; it < s.n_theta; ++it) {
        for (int jt = 0; jt < s.order; ++jt) {
          const double theta =
              -s.theta_half + wt * (it + 0.5 + 0.5 * gl.nodes[jt]);
          const double w_theta = 0.5 * wt * gl.weights[jt];
          const double c = std::cos(theta), sn = std::sin(theta);
          for (int ix = 0; ix < s.n_x3; ++ix) {
            for (int jx = 0; jx < s.order; ++jx) {
              const double x3 =
                  -s.x3_half + wx * (ix + 0.5 + 0.5 * gl.nodes[jx]);
              const double w_all =
                  w_sigma * w_theta * 0.5 * wx * gl.weights[jx];
              fn(Point3{sigma * c, sigma * sn, x3}, w_all);
            }
          }
        }
      }
    }
  }
}

MultiBumpAnsatz make_ansatz(int k, double r,
                            std::shared_ptr<const GroundStateProfile> profile,
                            const PotentialModel& potential) {
  if (!profile) throw Error("make_ansatz: null profile");
  return MultiBumpAnsatz{ring_config(k, r), std::move(profile), potential};
}

double evaluate_ansatz(const MultiBumpAnsatz& ansatz, const Point3& x) {
  double acc = 0.0;
  for (const auto& p : ansatz.config.positions)
    acc += evaluate_with_tail(*ansatz.profile, dist(x, p));
  return acc;
}

double radialized_potential(const PotentialModel& V, double rho, double s) {
  if (rho == 0.0) return V(s);
  if (s == 0.0) return V(rho);
  const auto& gl = gauss_legendre(24);
  double acc = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double c = gl.nodes[i];
    acc += gl.weights[i] * V(std::sqrt(rho * rho + s * s + 2.0 * rho * s * c));
  }
  return 0.5 * acc;
}

ReducedConstants reduced_constants(const GroundStateProfile& profile,
                                   double rel_tol, QuadratureBudget& budget) {
  ReducedConstants c;
  const double p = profile.p;
  c.C0 = (0.5 - 1.0 / (p + 1.0)) * integral_moment(profile, p + 1.0);
  const RadialDensity usq = density_u_sq(profile);
  c.B1 = 0.25 * coulomb_pair_integral(usq, usq, 0.0, rel_tol, budget);
  const double mass = integral_moment(profile, 2.0);
  c.B2 = mass * mass / (4.0 * M_PI);
  c.B3 = 0.5;
  c.provenance =
      "C0=(1/2-1/(p+1)) int U^{p+1}; B1=(1/4) int int U^2 U^2/|x-y|; "
      "B2=(int U^2)^2/(4 pi); B3=1/2";
  return c;
}

double reduced_energy(int k, double r, const ReducedConstants& constants,
                      const GroundStateProfile& profile,
                      const InteractionFit* fit, const PotentialModel& V,
                      double rel_tol, QuadratureBudget& budget) {
  return k * (constants.C0 + reduced_energy_bar(k, r, constants, profile, fit,
                                                V, rel_tol, budget));
}

double reduced_energy_bar(int k, double r, const ReducedConstants& constants,
                          const GroundStateProfile& profile,
                          const InteractionFit* fit, const PotentialModel& V,
                          double rel_tol, QuadratureBudget& budget) {
  if (k < 1) throw InvalidCount("reduced_energy: need k >= 1");
  const double a2 = V.a * V.a;
  const double alg =
      a2 * constants.B1 / std::pow(r, 2.0 * V.m) +
      a2 * constants.B2 * k * std::log((double)k) / std::pow(r, 2.0 * V.m + 1.0);
  double sigma = 0.0;
  if (k >= 2)
    sigma = ring_interaction_sum(profile, bump_positions(k, r), fit, rel_tol,
                                 budget);
  return alg - constants.B3 * sigma;
}

OptimalRadius find_optimal_radius(int k, const ReducedConstants& constants,
                                  const GroundStateProfile& profile,
                                  const InteractionFit* fit,
                                  const PotentialModel& V,
                                  const RadiusWindow& window, double rel_tol,
                                  QuadratureBudget& budget, int n_grid) {
  if (n_grid < 8) throw Error("find_optimal_radius: need n_grid >= 8");
  auto fbar = [&](double r) {
    return reduced_energy_bar(k, r, constants, profile, fit, V, rel_tol,
                              budget);
  };
  const double lo = window.lo, hi = window.hi, width = hi - lo;
  int best = 0;
  double best_val = -1e300;
  for (int i = 0; i < n_grid; ++i) {
    const double r = lo + width * i / (n_grid - 1);
    const double v = fbar(r);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = lo + width * std::max(0, best - 1) / (n_grid - 1);
  double b = lo + width * std::min(n_grid - 1, best + 1) / (n_grid - 1);
  // Golden-section refinement of the bracket around the grid argmax.
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = fbar(x1), f2 = fbar(x2);
  while (b - a > 1e-10 * width) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = fbar(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = fbar(x1);
    }
  }
  OptimalRadius out;
  out.r_k = 0.5 * (a + b);
  out.f_bar = std::max(f1, f2);
  out.interior =
      (out.r_k - lo > 0.005 * width) && (hi - out.r_k > 0.005 * width);
  return out;
}

EnergyBreakdown energy_direct(const MultiBumpAnsatz& ansatz,
                              const ReducedConstants& constants,
                              const InteractionFit* fit,
                              const QuadratureSpec& spec,
                              QuadratureBudget& budget) {
  const auto& prof = *ansatz.profile;
  const auto& cfg = ansatz.config;
  const PotentialModel& V = ansatz.potential;
  const int k = cfg.k;
  const double r = cfg.r;
  const double p = prof.p;
  const double twom = 2.0 * V.m;

  EnergyBreakdown out;

  // Kinetic + mass via the weak form: (U_i, U_j)_{H^1} = int U_i^p U_j.
  const double norm2 = energy_norm_sq(prof, field_U(prof));
  double ring = 0.0;
  if (k >= 2)
    ring = ring_interaction_sum(prof, cfg, fit, spec.rel_tol, budget);
  out.kinetic_mass = 0.5 * k * (norm2 + ring);
  out.kinetic_cross_direct = 0.5 * k * ring;
  if (k >= 2) {
    const double c_an = fit != nullptr && fit->c_analytic > 0.0
                            ? fit->c_analytic
                            : analytic_interaction_constant(prof);
    const double d1 = cfg.min_gap();
    const double n_nn = k == 2 ? 1.0 : 2.0;
    out.kinetic_cross_asym =
        0.5 * k * n_nn * c_an * std::exp(-d1) / d1;
  }

  // Diagonal nonlocal: with the monopole-radialized source the exact outer
  // integral collapses to 4 pi \int Vbar U^2 Phi s^2 ds as well.
  const NewtonPotential phi = bump_phi_table(ansatz);
  {
    const RadialDensity& src = phi.source();
    std::vector<double> g(src.f.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = src.r_at(i);
      g[i] = src.f[i] * phi(s) * s * s;
    }
    const double d_diag = 4.0 * M_PI * simpson_uniform(g, src.h);
    out.nonlocal_diag_direct = 0.25 * k * d_diag;
  }
  out.nonlocal_diag_asym = k * V.a * V.a * constants.B1 / std::pow(r, twom);

  // Self-cross nonlocal: phi_{U_i} against U_j^2 factorizes to leading order
  // as V(P_i) V(P_j) times the charge-charge Coulomb pair.
  if (k >= 2) {
    const RadialDensity usq = density_u_sq(prof);
    const double mass = integral_moment(prof, 2.0);
    const double vp = V(r);
    std::vector<double> parts;
    for (const auto& [d, mult] : folded_distances(k, r))
      parts.push_back(mult *
                      pair_coulomb(usq, mass * mass, d, spec.rel_tol, budget));
    out.nonlocal_cross_direct = 0.25 * k * vp * vp * pairwise_sum(parts);
  }
  out.nonlocal_cross_asym = k * V.a * V.a * constants.B2 * k *
                            std::log((double)k) / std::pow(r, twom + 1.0);
  out.nonlocal = out.nonlocal_diag_direct + out.nonlocal_cross_direct;

  // Nonlinear term by symmetry-sector quadrature with the pointwise sum
  // truncated to the n_nb nearest bumps on each side.
  const auto kept = kept_bumps(cfg, spec.n_nb);
  auto z_trunc = [&](const Point3& x) {
    double acc = 0.0;
    for (const Point3* ptr : kept)
      acc += evaluate_with_tail(prof, dist(x, *ptr));
    return acc;
  };
  out.nonlinear_direct =
      k / (p + 1.0) *
      sector_integral(
          cfg, spec,
          [&](const Point3& x) { return std::pow(z_trunc(x), p + 1.0); },
          budget);
  out.nonlinear = out.nonlinear_direct;
  out.nonlinear_asym = k * (integral_moment(prof, p + 1.0) / (p + 1.0) + ring);

  out.total = out.kinetic_mass + out.nonlocal - out.nonlinear;

  // Estimate of what the decomposition drops: mixed nonlocal terms (bounded by
  // a potential scale times a Lemma-2.4 overlap model) plus the far-bump
  // truncation of the nonlinear sum.
  {
    const double c_an = fit != nullptr && fit->c_analytic > 0.0
                            ? fit->c_analytic
                            : analytic_interaction_constant(prof);
    const double g1 = bump_potential_scale(prof);
    const double vp = V(r);
    double mixed = 0.0, far = 0.0;
    for (const auto& [d, mult] : folded_distances(k, r)) {
      mixed += mult * overlap_model_bound(c_an, d);
      if (d > cfg.min_gap() * (spec.n_nb + 0.5))
        far += mult * c_an * std::exp(-d) / d;
    }
    out.neglected_bound = 0.5 * k * vp * vp * g1 * mixed + k * far;
  }
  return out;
}

std::vector<RadialProbe> default_probes(
    std::shared_ptr<const GroundStateProfile> profile) {
  std::vector<RadialProbe> probes;
  probes.push_back(
      {"bump", [profile](double s) { return evaluate_with_tail(*profile, s); }});
  probes.push_back({"bump-sq", [profile](double s) {
                      const double u = evaluate_with_tail(*profile, s);
                      return u * u;
                    }});
  return probes;
}

double residual_surrogate(const MultiBumpAnsatz& ansatz,
                          const std::vector<RadialProbe>& probes,
                          const QuadratureSpec& spec, QuadratureBudget& budget) {
  if (probes.empty()) throw Error("residual_surrogate: no probes");
  const auto& prof = *ansatz.profile;
  const auto& cfg = ansatz.config;
  const int k = cfg.k;
  const double p = prof.p;
  const NewtonPotential phi = bump_phi_table(ansatz);
  const auto kept = kept_bumps(cfg, spec.n_nb);

  // phi_z keeps every bump: its 1/s envelope is not localized.
  auto phi_z = [&](const Point3& x) {
    double acc = 0.0;
    for (const auto& pos : cfg.positions) acc += phi(dist(x, pos));
    return acc;
  };

  double worst = 0.0;
  for (const auto& probe : probes) {
    // Diagonal H^1 norm of the symmetrized probe; the O(e^{-gap}) cross terms
    // are dropped from the normalization.
    const double h = prof.h;
    const std::size_t n = prof.size();
    std::vector<double> g(n), integ(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = probe.g(prof.r_at(i));
    for (std::size_t i = 0; i < n; ++i) {
      double dg;
      if (i == 0)
        dg = (g[1] - g[0]) / h;
      else if (i + 1 == n)
        dg = (g[n - 1] - g[n - 2]) / h;
      else
        dg = (g[i + 1] - g[i - 1]) / (2.0 * h);
      const double s = prof.r_at(i);
      integ[i] = (dg * dg + g[i] * g[i]) * s * s;
    }
    const double gnorm2 = 4.0 * M_PI * simpson_uniform(integ, h);
    if (gnorm2 <= 0.0) throw Error("residual_surrogate: degenerate probe");
    const double vnorm = std::sqrt(k * gnorm2);

    auto integrand = [&](const Point3& x) {
      const double vx =
          ansatz.potential(std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
      double z = 0.0, upsum = 0.0, v = 0.0;
      for (const Point3* ptr : kept) {
        const double u = evaluate_with_tail(prof, dist(x, *ptr));
        z += u;
        upsum += std::pow(u, p);
        v += probe.g(dist(x, *ptr));
      }
      return (vx * phi_z(x) * z - (std::pow(z, p) - upsum)) * v;
    };
    const double val = k * sector_integral(cfg, spec, integrand, budget);
    worst = std::max(worst, std::abs(val) / vnorm);
  }
  return worst;
}

double phi_z_seminorm(const MultiBumpAnsatz& ansatz, double rel_tol,
                      QuadratureBudget& budget) {
  const auto& prof = *ansatz.profile;
  const auto& cfg = ansatz.config;
  const RadialDensity usq = density_u_sq(prof);
  const double mass = integral_moment(prof, 2.0);
  const double vp = ansatz.potential(cfg.r);
  double row = coulomb_pair_integral(usq, usq, 0.0, rel_tol, budget);
  for (const auto& [d, mult] : folded_distances(cfg.k, cfg.r))
    row += mult * pair_coulomb(usq, mass * mass, d, rel_tol, budget);
  return std::sqrt(4.0 * M_PI * cfg.k * vp * vp * row);
}

LandscapePoint landscape_point(int k, double r, const ReducedConstants& constants,
                               const GroundStateProfile& profile,
                               const InteractionFit* fit,
                               const PotentialModel& V, double rel_tol,
                               QuadratureBudget& budget) {
  if (k < 2) throw InvalidCount("landscape_point: need k >= 2");
  LandscapePoint pt;
  pt.r = r;
  const double a2 = V.a * V.a;
  const double p = profile.p;
  const double norm2 = energy_norm_sq(profile, field_U(profile));
  const double sigma =
      ring_interaction_sum(profile, bump_positions(k, r), fit, rel_tol, budget);
  pt.kinetic_mass = 0.5 * k * (norm2 + sigma);
  pt.nonlocal =
      k * (a2 * constants.B1 / std::pow(r, 2.0 * V.m) +
           a2 * constants.B2 * k * std::log((double)k) /
               std::pow(r, 2.0 * V.m + 1.0));
  pt.nonlinear = k * (integral_moment(profile, p + 1.0) / (p + 1.0) + sigma);
  pt.f_reduced = pt.kinetic_mass + pt.nonlocal - pt.nonlinear;
  pt.f_bar = pt.f_reduced / k - constants.C0;
  const double c_an = fit != nullptr && fit->c_analytic > 0.0
                          ? fit->c_analytic
                          : analytic_interaction_constant(profile);
  const double g1 = bump_potential_scale(profile);
  const double vp = V(r);
  double mixed = 0.0;
  for (const auto& [d, mult] : folded_distances(k, r))
    mixed += mult * overlap_model_bound(c_an, d);
  pt.neglected_bound = 0.5 * k * vp * vp * g1 * mixed;
  return pt;
}

} // namespace spmb
