#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "spmb/energy.hpp"
#include "spmb/geometry.hpp"
#include "spmb/groundstate.hpp"
#include "spmb/quadrature.hpp"

namespace spmb {

// Bump-centered spectral basis for the correction w: radial functions times
// even axisymmetric angular factors P_l(cos gamma) about the bump axis,
// symmetrized by summing translates over all ring vertices.
struct BasisSpec {
  int n_radial = 6;                        // functions per angular order
  std::vector<int> angular_orders = {0, 1, 2};
  double support = 10.0;                   // radial spline span
};

struct BasisComponent {
  int l = 0;
  std::string name;
  std::vector<double> f, df;  // sampled on the profile grid; zero past support
};

struct SymmetricBasis {
  BumpConfiguration config;
  std::shared_ptr<const GroundStateProfile> profile;
  std::vector<BasisComponent> fns;

  std::size_t size() const { return fns.size(); }
};

// The first radial function of order 0 is U itself and of order 1 is U', so
// the symmetrized bump direction (and Z_{1,1}) lie in the span exactly.
SymmetricBasis build_symmetric_basis(
    const BumpConfiguration& config,
    std::shared_ptr<const GroundStateProfile> profile, const BasisSpec& spec);

double evaluate_basis_function(const SymmetricBasis& basis, std::size_t n,
                               const Point3& x);

// H^1 defect of projecting the single-bump field g(s) P_l(cos gamma) onto the
// order-l radial span (1D computation, cross-bump terms ignored).
double projection_defect(const SymmetricBasis& basis,
                         const std::function<double(double)>& g, int l);

// Radial lookup table with an algebraic far tail coef / r^pow.
struct RadialTable {
  double h = 0.0;
  std::vector<double> v;
  double tail_coef = 0.0;
  int tail_pow = 1;

  double operator()(double r) const;
  // Lookup with precomputed 4-point Lagrange weights anchored at index i0.
  double w_apply(std::size_t i0, const double* w) const;
};

struct ProjectedSystem {
  SymmetricBasis basis;
  MultiBumpAnsatz ansatz;
  QuadratureSpec quad;
  bool include_nonlocal = true;

  Eigen::MatrixXd gram;         // energy (H^1) inner products
  Eigen::MatrixXd lin;          // I''(z_r)[B_m, B_n]
  Eigen::MatrixXd constraints;  // rows j = 1, 2, 3 of the W-constraints at i=1
  Eigen::VectorXd load;         // l_k entries I'(z_r)[B_n]
  double gram_condition = 0.0;
  double constraint_defect_23 = 0.0;  // max |entry| of the j = 2, 3 rows

  // Cached potentials for the fixed point: the radialized bump potential and
  // the mixed-source multipole potentials Psi_n of V z_r B_n.
  RadialTable phi_bump;
  std::vector<RadialTable> psi;
  std::vector<double> vbar;  // radialized V about a bump, on the profile grid
};

ProjectedSystem assemble_projected_system(const SymmetricBasis& basis,
                                          const MultiBumpAnsatz& ansatz,
                                          const QuadratureSpec& quad,
                                          QuadratureBudget& budget,
                                          bool include_nonlocal = true);

struct SpectralReport {
  std::vector<double> eigenvalues;  // W-projected pencil (lin, gram)
  double bump_rayleigh = 0.0;       // along the projected symmetrized bump
  double c1_hat = 0.0;              // -bump_rayleigh when negative
  double c2_hat = 0.0;              // smallest complement eigenvalue
  double cbar_hat = 0.0;            // 1 / min |eigenvalue|
  bool split_ok = false;
};

SpectralReport spectral_split_check(const ProjectedSystem& system);

// Derivative of the contraction remainder R'(w) against the basis (nonlinear
// plus superlinear nonlocal parts; exact algebraic split off of L).
Eigen::VectorXd remainder_gradient(const ProjectedSystem& system,
                                   const Eigen::VectorXd& w,
                                   QuadratureBudget& budget);

struct FixedPointResult {
  Eigen::VectorXd w;
  std::vector<double> step_norms;  // Gram-norm steps per iteration
  std::vector<double> ratios;      // contraction ratios
  bool converged = false;
  bool damped = false;  // relaxation 0.5 engaged after a NotContracting signal
  int iterations = 0;
  double w_norm = 0.0;       // Gram norm of the fixed point
  double multiplier = 0.0;   // Lagrange multiplier of the active constraint
};

FixedPointResult solve_fixed_point(const ProjectedSystem& system,
                                   QuadratureBudget& budget, double tol = 1e-9,
                                   int max_iter = 25);

double evaluate_correction(const ProjectedSystem& system,
                           const Eigen::VectorXd& w, const Point3& x);

// |I'(z_r + w)[v]| / ||v|| with the same probe convention as
// residual_surrogate; w = 0 reproduces the uncorrected surrogate.
double corrected_residual_surrogate(const ProjectedSystem& system,
                                    const Eigen::VectorXd& w,
                                    const std::vector<RadialProbe>& probes,
                                    QuadratureBudget& budget);

} // namespace spmb
