#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "spmb/errors.hpp"
#include "spmb/groundstate.hpp"
#include "spmb/numerics.hpp"
#include "spmb/potentials.hpp"

using namespace spmb;

namespace {

const GroundStateProfile& profile_p3() {
  static GroundStateProfile prof = find_ground_state(3.0, 1e-10);
  return prof;
}

RadialDensity unit_ball() {
  return make_density([](double) { return 1.0; }, 1e-3, 1.0, TailKind::Zero,
                      0.0, 0.0);
}

}  // namespace

TEST_CASE("potential variants: bounds and decay law") {
  const double a = 1.3, m = 2.0;
  for (auto variant : {PotentialVariant::ShiftedPower, PotentialVariant::SoftPower,
                       PotentialVariant::CappedPower}) {
    PotentialModel V{a, m, variant, 1.0};
    for (double r : {0.0, 0.3, 1.0, 5.0, 50.0}) {
      CHECK(V(r) >= 0.0);
      CHECK(V(r) <= a * 1.0 + 1e-14);
    }
    // r^m V -> a.
    CHECK(std::pow(1e6, m) * V(1e6) == doctest::Approx(a).epsilon(1e-4));
  }
  // theta rates: |r^m V - a| = O(r^-theta), theta = 1 for shifted, m for soft.
  PotentialModel shifted{a, m, PotentialVariant::ShiftedPower, 1.0};
  PotentialModel soft{a, m, PotentialVariant::SoftPower, 1.0};
  const double r = 1e3;
  CHECK(std::abs(std::pow(r, m) * shifted(r) - a) * r / (a * m) ==
        doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(std::pow(r, m) * soft(r) - a) * std::pow(r, m) / a ==
        doctest::Approx(1.0).epsilon(0.01));
  // Capped variant is exactly a/r^m past the cap radius.
  PotentialModel capped{a, m, PotentialVariant::CappedPower, 2.0};
  CHECK(capped(10.0) == doctest::Approx(a / 100.0).epsilon(1e-14));
  CHECK(capped(0.0) == doctest::Approx(2.0 * a));
}

TEST_CASE("newton potential of the uniform ball") {
  const auto ball = unit_ball();
  CHECK(newton_potential_radial(ball, 0.0) == doctest::Approx(2.0 * M_PI).epsilon(1e-6));
  CHECK(newton_potential_radial(ball, 2.0) ==
        doctest::Approx(2.0 * M_PI / 3.0).epsilon(1e-6));

  const auto zero = make_density([](double) { return 0.0; }, 1e-2, 1.0,
                                 TailKind::Zero, 0.0, 0.0);
  for (double r : {0.0, 0.5, 3.0}) CHECK(newton_potential_radial(zero, r) == 0.0);

  // Tabulated potential agrees with the direct quadrature; Newton's theorem
  // outside the support.
  const NewtonPotential phi(ball);
  CHECK(phi.total_charge() == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-8));
  for (double r : {0.0, 0.4, 0.99, 1.7, 4.0})
    CHECK(phi(r) == doctest::Approx(newton_potential_radial(ball, r)).epsilon(1e-6));
  for (double r : {1.2, 2.0, 10.0})
    CHECK(phi(r) == doctest::Approx(phi.total_charge() / r).epsilon(1e-8));

  // Non-negative and non-increasing.
  double prev = phi(0.0);
  for (double r = 0.05; r < 3.0; r += 0.05) {
    const double v = phi(r);
    CHECK(v >= 0.0);
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
}

TEST_CASE("phi of the ground-state source") {
  const auto& prof = profile_p3();
  const PotentialModel V{1.0, 2.0, PotentialVariant::ShiftedPower, 1.0};
  const auto phi = phi_of_radial_source(prof, V);

  QuadratureBudget budget(50000000);
  const double mass =
      4.0 * M_PI *
      integrate_adaptive(
          [&](double t) {
            const double u = evaluate_with_tail(prof, t);
            return V(t) * u * u * t * t;
          },
          0.0, prof.r_max + 20.0, 1e-10, 1e-16, budget);
  const double center =
      4.0 * M_PI *
      integrate_adaptive(
          [&](double t) {
            const double u = evaluate_with_tail(prof, t);
            return V(t) * u * u * t;
          },
          0.0, prof.r_max + 20.0, 1e-10, 1e-16, budget);

  CHECK(phi(0.0) == doctest::Approx(center).epsilon(1e-5));
  for (double r = 0.0; r <= phi.r_max; r += 7.3) CHECK(phi(r) >= 0.0);
  // Far field carries the total mass.
  CHECK(100.0 * phi(100.0) == doctest::Approx(mass).epsilon(0.01));
  CHECK(3.0 * prof.r_max * phi(3.0 * prof.r_max) ==
        doctest::Approx(mass).epsilon(0.01));
}

TEST_CASE("coulomb pair integral: uniform-ball oracles") {
  const auto ball = unit_ball();
  QuadratureBudget budget(100000000);
  const double q = 4.0 * M_PI / 3.0;
  const double at3 = coulomb_pair_integral(ball, ball, 3.0, 1e-7, budget);
  CHECK(at3 == doctest::Approx(q * q / 3.0).epsilon(1e-5));
  const double at0 = coulomb_pair_integral(ball, ball, 0.0, 1e-7, budget);
  CHECK(at0 == doctest::Approx(1.2 * q * q).epsilon(1e-5));

  // Monotone non-increasing in d.
  double prev = at0;
  for (double d : {0.5, 1.0, 2.0, 3.0, 6.0}) {
    const double v = coulomb_pair_integral(ball, ball, d, 1e-7, budget);
    CHECK(v <= prev * (1.0 + 1e-9));
    prev = v;
  }

  QuadratureBudget tiny(50);
  CHECK_THROWS_AS(coulomb_pair_integral(ball, ball, 1.0, 1e-10, tiny),
                  QuadratureBudgetExceeded);
}

TEST_CASE("coulomb pair integral: ground-state density point-mass limit") {
  const auto& prof = profile_p3();
  const auto usq = density_u_sq(prof);
  QuadratureBudget budget(200000000);
  const double mass = integral_moment(prof, 2.0);
  const double at50 = coulomb_pair_integral(usq, usq, 50.0, 1e-7, budget);
  CHECK(50.0 * at50 == doctest::Approx(mass * mass).epsilon(0.02));
  // Symmetry in (f, g) with different densities.
  const auto vu = density_V_u_sq(
      prof, PotentialModel{1.0, 2.0, PotentialVariant::ShiftedPower, 1.0});
  const double fg = coulomb_pair_integral(usq, vu, 8.0, 1e-7, budget);
  const double gf = coulomb_pair_integral(vu, usq, 8.0, 1e-7, budget);
  CHECK(fg == doctest::Approx(gf).epsilon(1e-5));
}

TEST_CASE("representation-lemma Lipschitz echo: O(eps) potential difference") {
  const auto& prof = profile_p3();
  const PotentialModel V{1.0, 2.0, PotentialVariant::ShiftedPower, 1.0};
  const NewtonPotential base(density_V_u_sq(prof, V));
  std::vector<double> logeps, lognorm;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    auto scaled = make_density(
        [&](double r) {
          const double u = (1.0 + eps) * evaluate_with_tail(prof, r);
          return V(r) * u * u;
        },
        prof.h, prof.r_max, TailKind::ExpPower, 2.0, -(V.m + 2.0));
    const NewtonPotential pert(scaled);
    logeps.push_back(std::log(eps));
    lognorm.push_back(std::log(potential_seminorm_diff(pert, base, 120.0)));
  }
  const auto [icpt, slope] = linear_fit(logeps, lognorm);
  (void)icpt;
  CHECK(slope == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("density tail descriptor matches the sampled tail") {
  const auto& prof = profile_p3();
  const auto usq = density_u_sq(prof);
  // Over the last decade of values the descriptor tracks the samples to 2%.
  for (double r = prof.r_max - 1.1; r <= prof.r_max - 1e-9; r += 0.1) {
    const double sampled = usq(r);
    const double described = usq.tail(r);
    CHECK(described / sampled == doctest::Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("density serialization round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "spmb_density_test";
  fs::create_directories(dir);
  const auto usq = density_u_sq(profile_p3());
  const fs::path path = dir / "usq.txt";
  save_density(usq, path);
  const auto back = load_density(path);
  REQUIRE(back.f.size() == usq.f.size());
  for (std::size_t i = 0; i < usq.f.size(); i += 97) CHECK(back.f[i] == usq.f[i]);
  CHECK(back.tail.C == usq.tail.C);
  CHECK(back.tail.alpha == usq.tail.alpha);
  CHECK(back.h == usq.h);

  const fs::path bad = dir / "bad.txt";
  {
    std::FILE* f = std::fopen(bad.c_str(), "w");
    std::fputs("SPMB-D v9 h=0.1 rmax=1\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_density(bad), CacheFormatError);
  fs::remove_all(dir);
}
