#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace spmb {

// Tabulated radial ground state U of -u'' - (2/r)u' + u = u^p on [0, r_max]
// with the exponential tail law U(r) ~ c_decay * e^{-r}/r spliced beyond the
// radius where the shot solution drops below the splice threshold.
struct GroundStateProfile {
  double p = 0.0;
  double h = 0.0;
  double r_max = 0.0;
  std::vector<double> u;
  std::vector<double> du;
  double c_decay = 0.0;
  double center_value = 0.0;

  double r_at(std::size_t i) const { return static_cast<double>(i) * h; }
  std::size_t size() const { return u.size(); }
};

enum class ShotKind { Crossed, Rebounded, Decayed };

struct ShotOutcome {
  ShotKind kind;
  double r_event = 0.0;          // first crossing / rebound radius
  GroundStateProfile profile;    // populated only for Decayed
};

// Integrate the radial ODE from u(0)=u0 with RK4 (series start at the origin)
// and classify the trajectory.
ShotOutcome shoot(double p, double u0, double h, double r_max);

// Bisection on u0 over [1, u_hi]; the returned profile has the analytic tail
// spliced in and satisfies the discrete ODE residual bound.
GroundStateProfile find_ground_state(double p, double tol, double h = 1e-3,
                                     double r_max = 30.0);

// U(r) for any r >= 0: cubic interpolation on the grid, c_decay*e^{-r}/r
// beyond r_max.
double evaluate_with_tail(const GroundStateProfile& profile, double r);
// dU/dr with the matching tail formula.
double evaluate_du_with_tail(const GroundStateProfile& profile, double r);

// Max over interior nodes of |u'' + (2/r)u' - u + u^p| with fourth-order
// central stencils (second order underresolves u'''' ~ 1e3 near the origin).
double max_ode_residual(const GroundStateProfile& profile);

// \int_{R^3} U^q dx = 4*pi * \int_0^inf U^q r^2 dr, tail included.
double integral_moment(const GroundStateProfile& profile, double q);

// Radial-angular test field v = f(r) * Y_l(theta) (axis-symmetric spherical
// harmonic of order l); f, df sampled on the profile grid.
struct RadialAngularField {
  std::vector<double> f;
  std::vector<double> df;
  int l = 0;
};

RadialAngularField field_U(const GroundStateProfile& profile);   // v = U
RadialAngularField field_U1(const GroundStateProfile& profile);  // v = dU/dx1

// Q[v] = \int |grad v|^2 + v^2 - p U^{p-1} v^2.
double quadratic_form_Q(const GroundStateProfile& profile,
                        const RadialAngularField& v);
// \int |grad v|^2 + v^2.
double energy_norm_sq(const GroundStateProfile& profile,
                      const RadialAngularField& v);
// Bilinear versions (zero when the angular orders differ).
double energy_inner(const GroundStateProfile& profile,
                    const RadialAngularField& a, const RadialAngularField& b);
double q_inner(const GroundStateProfile& profile, const RadialAngularField& a,
               const RadialAngularField& b);
// \int U^{p-1} v_a v_b for fields of equal angular order (0 otherwise).
double weighted_inner(const GroundStateProfile& profile,
                      const RadialAngularField& a,
                      const RadialAngularField& b);

// Versioned text cache (`SPMB-U v1` header); writes are atomic
// (temp file + rename).
void save_profile(const GroundStateProfile& profile,
                  const std::filesystem::path& path);
GroundStateProfile load_profile(const std::filesystem::path& path);

// find_ground_state with a disk cache keyed on (p, h, r_max, integrator
// version).  cache_dir created on demand.
GroundStateProfile ground_state_cached(double p, double tol,
                                       const std::filesystem::path& cache_dir,
                                       double h = 1e-3, double r_max = 30.0);

std::string profile_cache_name(double p, double h, double r_max);

} // namespace spmb
