// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.  Criteria are independent; a throw inside one marks only
// that criterion failed.
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "spmb/corrector.hpp"
#include "spmb/energy.hpp"
#include "spmb/errors.hpp"
#include "spmb/geometry.hpp"
#include "spmb/interactions.hpp"
#include "spmb/runconfig.hpp"
#include "spmb/verify.hpp"

using namespace spmb;

namespace {

int g_failures = 0;

void criterion(int n, const std::function<std::pair<bool, std::string>()>& fn) {
  bool ok = false;
  std::string detail;
  try {
    auto [o, d] = fn();
    ok = o;
    detail = d;
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", n, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

std::shared_ptr<const GroundStateProfile> profile_p3() {
  static auto prof = std::make_shared<const GroundStateProfile>(
      ground_state_cached(3.0, 1e-10, "acceptance-cache"));
  return prof;
}

double canonical_radius(double m, int k) {
  return (m / M_PI) * k * std::log(static_cast<double>(k));
}

PotentialModel capped_v() {
  return PotentialModel{1.0, 2.0, PotentialVariant::CappedPower, 1.0};
}

}  // namespace

int main() {
  // 1. Ground-state identities for p in {2, 3, 4}.
  criterion(1, []() -> std::pair<bool, std::string> {
    bool ok = true;
    std::ostringstream d;
    for (double p : {2.0, 3.0, 4.0}) {
      const auto prof = ground_state_cached(p, 1e-10, "acceptance-cache");
      const double n2 = energy_norm_sq(prof, field_U(prof));
      const double pot = integral_moment(prof, p + 1.0);
      const double energy_gap = std::abs(n2 - pot) / n2;
      const double mass = integral_moment(prof, 2.0);
      const double kin = n2 - mass;
      const double poho =
          std::abs(0.5 * kin + 1.5 * mass - 3.0 / (p + 1.0) * pot) / n2;
      double lo = 1e300, hi = 0.0;
      for (double r = 20.0; r <= 25.0; r += 0.5) {
        const double v = evaluate_with_tail(prof, r) * r * std::exp(r);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      const double plateau = hi / lo - 1.0;
      ok = ok && energy_gap < 1e-4 && poho < 1e-3 && plateau < 0.01;
      d << fmt("p=%g energy %.1e poho %.1e plateau %.1e; ", p, energy_gap,
               poho, plateau);
    }
    return {ok, d.str()};
  });

  // 2. Nondegeneracy (Lemma 2.3) at p = 3.
  criterion(2, []() -> std::pair<bool, std::string> {
    const auto& prof = *profile_p3();
    const double qu = quadratic_form_Q(prof, field_U(prof)) /
                          energy_norm_sq(prof, field_U(prof)) -
                      (1.0 - 3.0);
    const auto u1 = field_U1(prof);
    const double qu1 = quadratic_form_Q(prof, u1) / energy_norm_sq(prof, u1);
    const bool ok = std::abs(qu) < 1e-3 && std::abs(qu1) < 1e-3;
    return {ok, fmt("Q[U]/||U||^2-(1-p)=%.2e, Q[U_1]/||U_1||^2=%.2e", qu, qu1)};
  });

  // 3. Lemma A.6 / Eq (A.11) ring sums.
  criterion(3, []() -> std::pair<bool, std::string> {
    std::vector<double> gaps;
    for (int k : {1000, 10000, 100000, 1000000}) {
      const double r = canonical_radius(2.0, k);
      double sum = 0.0;
      for (int i = 1; i < k; ++i)
        sum += 1.0 / (2.0 * r * std::sin(M_PI * i / k));
      gaps.push_back(
          std::abs(M_PI * r / (k * std::log(double(k))) * sum - 1.0));
    }
    bool ok = gaps.back() < 0.08;
    for (std::size_t i = 1; i < gaps.size(); ++i)
      ok = ok && gaps[i] < gaps[i - 1];
    return {ok, fmt("normalized gaps %.4f %.4f %.4f %.4f", gaps[0], gaps[1],
                    gaps[2], gaps[3])};
  });

  // 4. Lemma 2.5 interaction asymptotics.
  criterion(4, []() -> std::pair<bool, std::string> {
    QuadratureBudget budget(0);
    const auto& prof = *profile_p3();
    const auto fit = fit_interaction(prof, 1e-8, budget);
    const double slope_gap = std::abs(fit.slope + 1.0);
    const double p10 = 10.0 * std::exp(10.0) *
                       interaction_ep(prof, 10.0, 1e-8, budget);
    const double p12 = 12.0 * std::exp(12.0) *
                       interaction_ep(prof, 12.0, 1e-8, budget);
    const double plateau_gap = std::abs(p10 / p12 - 1.0);
    const double c_gap = std::abs(fit.c_star / fit.c_analytic - 1.0);
    const bool ok = slope_gap < 0.02 && plateau_gap < 0.03 && c_gap < 0.03;
    return {ok, fmt("slope gap %.2e, plateau gap %.2e, C* gap %.2e", slope_gap,
                    plateau_gap, c_gap)};
  });

  // 5. Appendix A term-wise oracle equivalence, k in {8, 12, 16}.
  criterion(5, []() -> std::pair<bool, std::string> {
    QuadratureBudget budget(0);
    const auto& prof = *profile_p3();
    const auto constants = reduced_constants(prof, 1e-7, budget);
    const auto fit = fit_interaction(prof, 1e-8, budget);
    double prev[3] = {1e300, 1e300, 1e300};
    bool ok = true;
    std::ostringstream d;
    for (int k : {8, 12, 16}) {
      auto ansatz = make_ansatz(k, canonical_radius(2.0, k), profile_p3(),
                                capped_v());
      const auto bd =
          energy_direct(ansatz, constants, &fit, QuadratureSpec{}, budget);
      const double g0 =
          std::abs(bd.kinetic_cross_direct / bd.kinetic_cross_asym - 1.0);
      const double g1 =
          std::abs(bd.nonlocal_diag_direct / bd.nonlocal_diag_asym - 1.0);
      const double g2 =
          std::abs(bd.nonlocal_cross_direct / bd.nonlocal_cross_asym - 1.0);
      ok = ok && g0 < 0.10 && g1 < 0.20 && g2 < 0.30;
      ok = ok && g0 <= prev[0] && g1 <= prev[1] && g2 <= prev[2];
      prev[0] = g0;
      prev[1] = g1;
      prev[2] = g2;
      d << fmt("k=%d gaps %.1e/%.1e/%.1e; ", k, g0, g1, g2);
    }
    return {ok, d.str()};
  });

  // 6. §3.2 landscape structure over k in {25, 50, 100, 200}.
  criterion(6, []() -> std::pair<bool, std::string> {
    QuadratureBudget budget(0);
    const auto& prof = *profile_p3();
    const auto constants = reduced_constants(prof, 1e-7, budget);
    const auto fit = fit_interaction(prof, 1e-8, budget);
    const double beta = 0.3, m = 2.0;
    bool signs = true, interior = true, toward = true, monotone = true;
    double prev_dist = -1.0;
    std::ostringstream d;
    for (int k : {25, 50, 100, 200}) {
      const auto win = radius_window(m, beta, k);
      const double f_lo = reduced_energy_bar(k, win.lo, constants, prof, &fit,
                                             capped_v(), 1e-7, budget);
      const double f_hi = reduced_energy_bar(k, win.hi, constants, prof, &fit,
                                             capped_v(), 1e-7, budget);
      signs = signs && f_lo < 0.0 && f_hi > 0.0;
      const auto opt = find_optimal_radius(k, constants, prof, &fit,
                                           capped_v(), win, 1e-7, budget);
      interior = interior && opt.interior;
      const double ratio = opt.r_k / (k * std::log(double(k)));
      const double dist = std::abs(ratio - m / M_PI);
      if (prev_dist >= 0.0) {
        monotone = monotone && dist < prev_dist;
        toward = toward && dist < prev_dist;
      }
      prev_dist = dist;
      d << fmt("k=%d ratio %.4f; ", k, ratio);
    }
    const bool ok = signs && interior && toward && monotone;
    d << fmt("signs=%d interior=%d drift-toward-m/pi=%d", signs, interior,
             toward && monotone);
    return {ok, d.str()};
  });

  // 7. Lemma 3.2 echo: residual-surrogate decay in k.
  criterion(7, []() -> std::pair<bool, std::string> {
    QuadratureBudget budget(0);
    auto probes = default_probes(profile_p3());
    std::vector<double> lk, lv;
    for (int k : {8, 16, 32, 64}) {
      auto ansatz = make_ansatz(k, canonical_radius(2.0, k), profile_p3(),
                                capped_v());
      const double v =
          residual_surrogate(ansatz, probes, QuadratureSpec{}, budget);
      lk.push_back(std::log(double(k)));
      lv.push_back(std::log(v));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = lk.size();
    for (std::size_t i = 0; i < lk.size(); ++i) {
      sx += lk[i];
      sy += lv[i];
      sxx += lk[i] * lk[i];
      sxy += lk[i] * lv[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double bound = -(2.0 - 0.5) + 0.25;
    return {slope <= bound, fmt("slope %.3f vs bound %.3f", slope, bound)};
  });

  // 8. Proposition 3.1 / Lemma 3.4 echo at k = 8 plus decay of ||w||.
  criterion(8, []() -> std::pair<bool, std::string> {
    QuadratureBudget budget(0);
    std::vector<double> lk, lw;
    bool split = true, contracts = true, drop = true, positive = true;
    std::ostringstream d;
    for (int k : {8, 16, 32}) {
      auto ansatz = make_ansatz(k, canonical_radius(2.0, k), profile_p3(),
                                capped_v());
      auto basis =
          build_symmetric_basis(ansatz.config, profile_p3(), BasisSpec{});
      auto sys =
          assemble_projected_system(basis, ansatz, QuadratureSpec{}, budget);
      auto rep = spectral_split_check(sys);
      split = split && rep.split_ok && rep.bump_rayleigh < 0.0 &&
              rep.c2_hat > 0.0;
      auto fp = solve_fixed_point(sys, budget);
      double worst = 0.0;
      for (double r : fp.ratios) worst = std::max(worst, r);
      contracts = contracts && fp.converged && worst < 0.5;
      lk.push_back(std::log(double(k)));
      lw.push_back(std::log(fp.w_norm));
      if (k == 8) {
        auto probes = default_probes(profile_p3());
        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(basis.size());
        const double before =
            corrected_residual_surrogate(sys, zero, probes, budget);
        const double after =
            corrected_residual_surrogate(sys, fp.w, probes, budget);
        drop = after <= 0.2 * before;
        d << fmt("residual %.2e -> %.2e; ", before, after);
        const double r = ansatz.config.r;
        for (int i = 0; i <= 40 && positive; ++i)
          for (int j = -2; j <= 2; ++j) {
            const Point3 x{r - 6.0 + 0.3 * i, 1.5 * j, 0.7 * j};
            positive = positive && evaluate_ansatz(ansatz, x) +
                                           evaluate_correction(sys, fp.w, x) >
                                       0.0;
          }
      }
    }
    const double slope = (lw.back() - lw.front()) / (lk.back() - lk.front());
    const double bound = -(2.0 - 0.5) + 0.3;
    const bool ok = split && contracts && drop && positive && slope <= bound;
    d << fmt("split=%d contracts=%d slope %.2f vs %.2f positive=%d", split,
             contracts, slope, bound, positive);
    return {ok, d.str()};
  });

  // 9. Engineering determinism.
  criterion(9, []() -> std::pair<bool, std::string> {
    RunConfig cfg;
    cfg.cache_dir = "acceptance-cache";
    const auto a = report_json(run_verify(cfg), cfg);
    const auto b = report_json(run_verify(cfg), cfg);
    const bool reports = (a == b) && a.find("\"all_passed\": true") !=
                                         std::string::npos;

    const auto& prof = *profile_p3();
    save_profile(prof, "acceptance-cache/roundtrip.txt");
    const auto back = load_profile("acceptance-cache/roundtrip.txt");
    bool exact = back.u.size() == prof.u.size() &&
                 back.c_decay == prof.c_decay && back.p == prof.p;
    for (std::size_t i = 0; exact && i < prof.u.size(); ++i)
      exact = back.u[i] == prof.u[i] && back.du[i] == prof.du[i];
    return {reports && exact,
            fmt("verify reports identical=%d all-pass=%d, cache exact=%d",
                a == b, a.find("\"all_passed\": true") != std::string::npos,
                exact)};
  });

  std::printf("%d of 9 criteria passed\n", 9 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
