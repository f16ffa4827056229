#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "spmb/groundstate.hpp"
#include "spmb/quadrature.hpp"

namespace spmb {

// External potential V(r): bounded, non-negative, V(r) ~ a / r^m at infinity.
enum class PotentialVariant { ShiftedPower, SoftPower, CappedPower };

struct PotentialModel {
  double a = 1.0;
  double m = 2.0;
  PotentialVariant variant = PotentialVariant::ShiftedPower;
  double cap = 1.0;  // CappedPower only: V = min(a * cap, a / r^m)

  double operator()(double r) const;
};

// Non-negative radial density sampled on a uniform grid with an analytic tail
// beyond r_max.  ExpPower: C e^{-alpha r} r^{power}; InversePower: C r^{-power}
// (power > 0); Zero: compactly supported.
enum class TailKind { Zero, ExpPower, InversePower };

struct TailDescriptor {
  TailKind kind = TailKind::Zero;
  double C = 0.0;
  double alpha = 0.0;
  double power = 0.0;

  double operator()(double r) const;
};

struct RadialDensity {
  double h = 0.0;
  double r_max = 0.0;
  std::vector<double> f;
  TailDescriptor tail;

  double operator()(double r) const;
  double r_at(std::size_t i) const { return static_cast<double>(i) * h; }
  // Radius beyond which the density is negligible (tail below 1e-300 for Zero,
  // r_max plus a decay margin otherwise).
  double support_radius() const;
};

// Sample fn on [0, r_max] and calibrate the tail amplitude C from the last
// grid value so the descriptor continues the samples.
RadialDensity make_density(const std::function<double(double)>& fn, double h,
                           double r_max, TailKind kind, double alpha,
                           double power);

// The density V(r) u(r)^2 driving the Poisson equation.
RadialDensity density_V_u_sq(const GroundStateProfile& u,
                             const PotentialModel& V);
// u(r)^2 alone (the Coulomb self-interaction density).
RadialDensity density_u_sq(const GroundStateProfile& u);

// Newtonian potential of a radial density: tabulated
// Phi(r) = (4 pi / r) \int_0^r f t^2 dt + 4 pi \int_r^inf f t dt.
class NewtonPotential {
 public:
  explicit NewtonPotential(RadialDensity source);

  double operator()(double r) const;
  double derivative(double r) const;  // dPhi/dr = -(4 pi / r^2) M_in(r)
  double total_charge() const { return charge_; }  // \int f dx
  const RadialDensity& source() const { return source_; }

 private:
  void tail_moments(double r, double* t1, double* t2) const;

  RadialDensity source_;
  std::vector<double> phi_;    // on the source grid
  std::vector<double> m_in_;   // 4 pi \int_0^r f t^2 dt
  double charge_ = 0.0;
  double tail_charge_ = 0.0;
  // Tail moments tabulated over [r_max, support] for exp-power tails, so that
  // evaluation beyond the grid stays O(1).
  double band_h_ = 0.0;
  std::vector<double> band_t1_, band_t2_;
};

// One-shot evaluation (builds no table; adaptive quadrature per call).
double newton_potential_radial(const RadialDensity& f, double r);

// phi_u of Lemma-2.1 type for a radial source: the full potential of V u^2,
// returned as a tabulated radial density with 1/r tail.
RadialDensity phi_of_radial_source(const GroundStateProfile& u,
                                   const PotentialModel& V,
                                   double grid_stretch = 3.0);

// \int\int f(|x|) g(|y|) / |x - y + d e_1| dx dy via the Newton potential of f
// and a spherical-shell quadrature around g's center.
double coulomb_pair_integral(const RadialDensity& f, const RadialDensity& g,
                             double d, double rel_tol, QuadratureBudget& budget);

// Energy seminorm ||grad phi||_L2 of the potential difference of two radial
// sources (used by the Lipschitz echo of the representation lemma).
double potential_seminorm_diff(const NewtonPotential& a,
                               const NewtonPotential& b, double r_lim);

// Versioned text serialization, `SPMB-D v1` header, atomic writes.
void save_density(const RadialDensity& f, const std::filesystem::path& path);
RadialDensity load_density(const std::filesystem::path& path);

} // namespace spmb
