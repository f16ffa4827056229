#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "spmb/geometry.hpp"
#include "spmb/groundstate.hpp"
#include "spmb/interactions.hpp"
#include "spmb/potentials.hpp"
#include "spmb/quadrature.hpp"

namespace spmb {

// z_r = sum of k ground-state bumps on the ring, in the field V.
struct MultiBumpAnsatz {
  BumpConfiguration config;
  std::shared_ptr<const GroundStateProfile> profile;
  PotentialModel potential;
};

// k >= 1; the degenerate k = 1 case (single bump at (r, 0, 0)) is allowed
// internally for limit checks.
MultiBumpAnsatz make_ansatz(int k, double r,
                            std::shared_ptr<const GroundStateProfile> profile,
                            const PotentialModel& potential);

double evaluate_ansatz(const MultiBumpAnsatz& ansatz, const Point3& x);

struct ReducedConstants {
  double C0 = 0.0;  // (1/2 - 1/(p+1)) \int U^{p+1}
  double B1 = 0.0;  // (1/4) \int\int U^2 U^2 / |x-y|
  double B2 = 0.0;  // (\int U^2)^2 / (4 pi)
  double B3 = 0.5;
  std::string provenance;
};

ReducedConstants reduced_constants(const GroundStateProfile& profile,
                                   double rel_tol, QuadratureBudget& budget);

// F(r) = k [C0 + a^2 B1/r^{2m} + a^2 B2 k log k/r^{2m+1} - B3 * Sigma].
double reduced_energy(int k, double r, const ReducedConstants& constants,
                      const GroundStateProfile& profile,
                      const InteractionFit* fit, const PotentialModel& V,
                      double rel_tol, QuadratureBudget& budget);
// F(r)/k - C0 (same maximizer, resolvable scale).
double reduced_energy_bar(int k, double r, const ReducedConstants& constants,
                          const GroundStateProfile& profile,
                          const InteractionFit* fit, const PotentialModel& V,
                          double rel_tol, QuadratureBudget& budget);

struct OptimalRadius {
  double r_k = 0.0;
  bool interior = false;
  double f_bar = 0.0;  // F_bar at the maximizer
};

OptimalRadius find_optimal_radius(int k, const ReducedConstants& constants,
                                  const GroundStateProfile& profile,
                                  const InteractionFit* fit,
                                  const PotentialModel& V,
                                  const RadiusWindow& window, double rel_tol,
                                  QuadratureBudget& budget, int n_grid = 200);

struct QuadratureSpec {
  double rel_tol = 1e-7;   // pair/overlap quadrature tolerance
  int gl_order = 6;        // sector tensor-panel order
  double panel_width = 1.0;
  double box_half = 12.0;  // half-size of the bump-centered integration box
  int n_nb = 2;            // nearest neighbors kept on each side in z_r
};

struct EnergyBreakdown {
  // Eq-(A.1) pieces: total = kinetic_mass + nonlocal - nonlinear.
  double kinetic_mass = 0.0;
  double nonlocal = 0.0;
  double nonlinear = 0.0;
  double total = 0.0;
  // Term families and their leading asymptotic counterparts.
  double kinetic_cross_direct = 0.0;
  double kinetic_cross_asym = 0.0;  // k * nearest-neighbor Lemma-2.5 model
  double nonlocal_diag_direct = 0.0;
  double nonlocal_diag_asym = 0.0;  // k a^2 B1 / r^{2m}
  double nonlocal_cross_direct = 0.0;
  double nonlocal_cross_asym = 0.0;  // k a^2 B2 k log k / r^{2m+1}
  double nonlinear_direct = 0.0;
  double nonlinear_asym = 0.0;
  double neglected_bound = 0.0;  // mixed nonlocal + far-bump truncation
};

// Visit the tensor Gauss-Legendre nodes of the symmetry-sector quadrature in
// a fixed deterministic order; weight includes the cylindrical Jacobian.
void sector_for_each(const BumpConfiguration& config, const QuadratureSpec& spec,
                     const std::function<void(const Point3&, double)>& fn,
                     QuadratureBudget& budget);

EnergyBreakdown energy_direct(const MultiBumpAnsatz& ansatz,
                              const ReducedConstants& constants,
                              const InteractionFit* fit,
                              const QuadratureSpec& spec,
                              QuadratureBudget& budget);

// Max over probes of |I'(z_r)[v]| with v = symmetrized normalized radial-bump
// sums; g supplies the radial profile of each probe (default: U itself).
struct RadialProbe {
  std::string name;
  std::function<double(double)> g;
};

double residual_surrogate(const MultiBumpAnsatz& ansatz,
                          const std::vector<RadialProbe>& probes,
                          const QuadratureSpec& spec, QuadratureBudget& budget);

std::vector<RadialProbe> default_probes(
    std::shared_ptr<const GroundStateProfile> profile);

// || grad phi_{z_r} ||_{L^2} from the pairwise Coulomb decomposition.
double phi_z_seminorm(const MultiBumpAnsatz& ansatz, double rel_tol,
                      QuadratureBudget& budget);

// Spherical average of V over the sphere of radius s centered at distance rho
// from the origin.
double radialized_potential(const PotentialModel& V, double rho, double s);

// Cheap reduced-family row for landscape emission.
struct LandscapePoint {
  double r = 0.0;
  double f_reduced = 0.0;
  double f_bar = 0.0;
  double kinetic_mass = 0.0;
  double nonlocal = 0.0;
  double nonlinear = 0.0;
  double neglected_bound = 0.0;
};

LandscapePoint landscape_point(int k, double r, const ReducedConstants& constants,
                               const GroundStateProfile& profile,
                               const InteractionFit* fit,
                               const PotentialModel& V, double rel_tol,
                               QuadratureBudget& budget);

} // namespace spmb
