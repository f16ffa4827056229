#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"
#include "spmb/energy.hpp"
#include "spmb/errors.hpp"
#include "spmb/numerics.hpp"

using namespace spmb;

namespace {

std::shared_ptr<const GroundStateProfile> profile_p3() {
  static auto prof = std::make_shared<const GroundStateProfile>(
      find_ground_state(3.0, 1e-10));
  return prof;
}

const InteractionFit& fit_p3() {
  static InteractionFit fit = [] {
    QuadratureBudget budget(5000000000ULL);
    return fit_interaction(*profile_p3(), 1e-8, budget);
  }();
  return fit;
}

const ReducedConstants& constants_p3() {
  static ReducedConstants c = [] {
    QuadratureBudget budget(5000000000ULL);
    return reduced_constants(*profile_p3(), 1e-7, budget);
  }();
  return c;
}

PotentialModel capped_v() {
  // Exactly a/r^m at every bump distance used below.
  return PotentialModel{1.0, 2.0, PotentialVariant::CappedPower, 1.0};
}

}  // namespace

TEST_CASE("reduced constants against frozen values") {
  const auto& c = constants_p3();
  // p = 3: C0 = (1/2 - 1/4) int U^4 = int U^4 / 4.
  CHECK(c.C0 == doctest::Approx(18.897251).epsilon(1e-5));
  CHECK(c.C0 ==
        doctest::Approx(integral_moment(*profile_p3(), 4.0) / 4.0).epsilon(1e-12));
  CHECK(c.B1 == doctest::Approx(96.9967).epsilon(1e-4));
  const double mass = integral_moment(*profile_p3(), 2.0);
  CHECK(c.B2 == doctest::Approx(mass * mass / (4.0 * M_PI)).epsilon(1e-12));
  CHECK(c.B2 == doctest::Approx(28.4176).epsilon(1e-4));
  CHECK(c.B3 == 0.5);
}

TEST_CASE("ansatz evaluation: symmetry and positivity") {
  auto prof = profile_p3();
  const int k = 8;
  const double r = 11.0;
  const auto ansatz = make_ansatz(k, r, prof, capped_v());
  const double at_bump = evaluate_ansatz(ansatz, Point3{r, 0.0, 0.0});
  CHECK(at_bump > prof->center_value);  // neighbors only add
  CHECK(at_bump < prof->center_value * 1.01);
  // Rotation by 2 pi / k maps the configuration to itself.
  const double c = std::cos(2.0 * M_PI / k), s = std::sin(2.0 * M_PI / k);
  const Point3 x{r + 1.3, 2.1, -0.7};
  const Point3 xr{c * x[0] - s * x[1], s * x[0] + c * x[1], x[2]};
  CHECK(evaluate_ansatz(ansatz, x) ==
        doctest::Approx(evaluate_ansatz(ansatz, xr)).epsilon(1e-12));
  // Samples on a symmetric grid stay positive.
  for (double t : {-20.0, -5.0, 0.0, 5.0, 20.0})
    CHECK(evaluate_ansatz(ansatz, Point3{t, 0.3 * t, -0.5 * t}) > 0.0);

  CHECK(make_ansatz(1, 0.0, prof, capped_v()).config.k == 1);
  CHECK_THROWS_AS(make_ansatz(0, 5.0, prof, capped_v()), InvalidCount);
}

TEST_CASE("radialized potential") {
  const PotentialModel V = capped_v();
  CHECK(radialized_potential(V, 0.0, 3.0) == doctest::Approx(V(3.0)));
  CHECK(radialized_potential(V, 7.0, 0.0) == doctest::Approx(V(7.0)));
  // Symmetric in (rho, s) and bracketed by the extreme sphere values.
  CHECK(radialized_potential(V, 10.0, 2.0) ==
        doctest::Approx(radialized_potential(V, 2.0, 10.0)).epsilon(1e-12));
  const double vbar = radialized_potential(V, 10.0, 2.0);
  CHECK(vbar > V(12.0));
  CHECK(vbar < V(8.0));
}

TEST_CASE("reduced energy consistency with the landscape row") {
  auto prof = profile_p3();
  const auto& c = constants_p3();
  const PotentialModel V = capped_v();
  QuadratureBudget budget(5000000000ULL);
  const int k = 12;
  const double r = 20.0;
  const double f =
      reduced_energy(k, r, c, *prof, &fit_p3(), V, 1e-7, budget);
  const double fbar =
      reduced_energy_bar(k, r, c, *prof, &fit_p3(), V, 1e-7, budget);
  CHECK(f == doctest::Approx(k * (c.C0 + fbar)).epsilon(1e-12));
  const auto row = landscape_point(k, r, c, *prof, &fit_p3(), V, 1e-7, budget);
  CHECK(row.f_reduced == doctest::Approx(f).epsilon(1e-9));
  CHECK(row.f_bar == doctest::Approx(fbar).epsilon(1e-9));
  CHECK(row.f_reduced == doctest::Approx(row.kinetic_mass + row.nonlocal -
                                         row.nonlinear)
                             .epsilon(1e-12));
  CHECK(row.neglected_bound > 0.0);
}

TEST_CASE("direct energy term families vs asymptotic counterparts") {
  auto prof = profile_p3();
  const auto& c = constants_p3();
  const PotentialModel V = capped_v();
  QuadratureBudget budget(5000000000ULL);
  const double m = V.m;

  double prev_kin = 1e9, prev_diag = 1e9, prev_cross = 1e9;
  for (int k : {8, 12, 16}) {
    const double r = (m / M_PI) * k * std::log(double(k));
    const auto ansatz = make_ansatz(k, r, prof, V);
    const auto e = energy_direct(ansatz, c, &fit_p3(), QuadratureSpec{}, budget);

    CHECK(e.total ==
          doctest::Approx(e.kinetic_mass + e.nonlocal - e.nonlinear)
              .epsilon(1e-12));
    CHECK(e.nonlocal == doctest::Approx(e.nonlocal_diag_direct +
                                        e.nonlocal_cross_direct)
                            .epsilon(1e-12));

    const double gap_kin =
        std::abs(e.kinetic_cross_direct / e.kinetic_cross_asym - 1.0);
    const double gap_diag =
        std::abs(e.nonlocal_diag_direct / e.nonlocal_diag_asym - 1.0);
    const double gap_cross =
        std::abs(e.nonlocal_cross_direct / e.nonlocal_cross_asym - 1.0);
    CHECK(gap_kin < 0.10);
    CHECK(gap_diag < 0.20);
    CHECK(gap_cross < 0.30);
    CHECK(gap_kin < prev_kin);
    CHECK(gap_diag < prev_diag);
    CHECK(gap_cross < prev_cross);
    prev_kin = gap_kin;
    prev_diag = gap_diag;
    prev_cross = gap_cross;

    CHECK(std::abs(e.nonlinear_direct / e.nonlinear_asym - 1.0) < 0.01);
    // What the decomposition drops is small against the leading families.
    CHECK(e.neglected_bound < 0.05 * e.nonlocal_cross_direct);
  }
}

TEST_CASE("degenerate k = 1 limit recovers the single-bump energy") {
  auto prof = profile_p3();
  const auto& c = constants_p3();
  QuadratureBudget budget(5000000000ULL);
  const PotentialModel V0{0.0, 2.0, PotentialVariant::CappedPower, 1.0};
  const auto ansatz = make_ansatz(1, 0.0, prof, V0);
  const auto e = energy_direct(ansatz, c, nullptr, QuadratureSpec{}, budget);
  CHECK(e.kinetic_cross_direct == 0.0);
  CHECK(e.nonlocal == 0.0);
  CHECK(e.nonlinear_direct ==
        doctest::Approx(integral_moment(*prof, 4.0) / 4.0).epsilon(1e-4));
  CHECK(e.total == doctest::Approx(c.C0).epsilon(1e-4));
}

TEST_CASE("optimal radius at k = 25 (beta = 0.3)") {
  auto prof = profile_p3();
  const auto& c = constants_p3();
  QuadratureBudget budget(5000000000ULL);
  const double m = 2.0;
  const auto window = radius_window(m, 0.3, 25);
  const auto opt = find_optimal_radius(25, c, *prof, &fit_p3(), capped_v(),
                                       window, 1e-7, budget);
  CHECK(opt.interior);
  CHECK(opt.r_k / (25.0 * std::log(25.0)) ==
        doctest::Approx(0.715461).epsilon(1e-3));
  CHECK(opt.f_bar > 0.0);
  // The maximizer beats the window endpoints.
  CHECK(opt.f_bar > reduced_energy_bar(25, window.lo, c, *prof, &fit_p3(),
                                       capped_v(), 1e-7, budget));
  CHECK(opt.f_bar > reduced_energy_bar(25, window.hi, c, *prof, &fit_p3(),
                                       capped_v(), 1e-7, budget));
}

TEST_CASE("residual surrogate: exact zero, decay, frozen value") {
  auto prof = profile_p3();
  QuadratureBudget budget(20000000000ULL);
  const auto probes = default_probes(prof);
  CHECK(probes.size() >= 1);

  // V = 0, k = 1: z = U solves the limit equation exactly.
  const PotentialModel V0{0.0, 2.0, PotentialVariant::CappedPower, 1.0};
  CHECK(std::abs(residual_surrogate(make_ansatz(1, 0.0, prof, V0), probes,
                                    QuadratureSpec{}, budget)) < 1e-12);

  const double m = 2.0;
  const PotentialModel V = capped_v();
  const double r8 = (m / M_PI) * 8.0 * std::log(8.0);
  const double rs8 = residual_surrogate(make_ansatz(8, r8, prof, V), probes,
                                        QuadratureSpec{}, budget);
  CHECK(rs8 == doctest::Approx(8.3026e-3).epsilon(1e-3));
  const double r16 = (m / M_PI) * 16.0 * std::log(16.0);
  const double rs16 = residual_surrogate(make_ansatz(16, r16, prof, V), probes,
                                         QuadratureSpec{}, budget);
  CHECK(rs16 < rs8);
}

TEST_CASE("phi_z energy seminorm scales like r^{-m} at fixed k") {
  auto prof = profile_p3();
  QuadratureBudget budget(5000000000ULL);
  const double m = 2.0;
  const PotentialModel V = capped_v();
  std::vector<double> lr, ln;
  for (double r : {11.0, 16.5, 22.0}) {
    const double nn =
        phi_z_seminorm(make_ansatz(8, r, prof, V), 1e-7, budget);
    CHECK(nn > 0.0);
    lr.push_back(std::log(r));
    ln.push_back(std::log(nn));
  }
  const auto [icpt, slope] = linear_fit(lr, ln);
  (void)icpt;
  CHECK(slope == doctest::Approx(-m).epsilon(0.15));
}
