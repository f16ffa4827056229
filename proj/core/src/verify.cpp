#include "spmb/verify.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <sstream>

#include "json.hpp"

#include "spmb/corrector.hpp"
#include "spmb/energy.hpp"
#include "spmb/errors.hpp"
#include "spmb/geometry.hpp"
#include "spmb/interactions.hpp"
#include "spmb/version.hpp"

namespace spmb {

namespace {

struct Suite {
  const RunConfig& cfg;
  QuadratureBudget budget;
  VerifyReport report;
  std::shared_ptr<const GroundStateProfile> profile;

  explicit Suite(const RunConfig& c) : cfg(c), budget(c.budget) {}

  // value |.| <= threshold passes; exceptions become failures.
  void check(const std::string& name, double threshold,
             const std::function<double()>& measure,
             const std::string& what) {
    CheckResult r;
    r.name = name;
    r.threshold = threshold;
    try {
      r.value = measure();
      r.passed = std::abs(r.value) <= threshold;
      std::ostringstream d;
      d.precision(6);
      d << what << ": |" << r.value << "| vs " << threshold;
      r.detail = d.str();
    } catch (const Error& e) {
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    report.checks.push_back(std::move(r));
  }

  // boolean predicate variant; value records an associated measurement.
  void check_flag(const std::string& name,
                  const std::function<std::pair<bool, double>()>& measure,
                  const std::string& what) {
    CheckResult r;
    r.name = name;
    r.threshold = 0.0;
    try {
      auto [ok, val] = measure();
      r.passed = ok;
      r.value = val;
      std::ostringstream d;
      d.precision(6);
      d << what << ": " << val;
      r.detail = d.str();
    } catch (const Error& e) {
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    report.checks.push_back(std::move(r));
  }
};

double canonical_radius(double m, int k) {
  return (m / M_PI) * k * std::log(static_cast<double>(k));
}

}  // namespace

VerifyReport run_verify(const RunConfig& cfg) {
  Suite s(cfg);

  try {
    s.profile = std::make_shared<const GroundStateProfile>(
        ground_state_cached(cfg.p, 1e-10, cfg.cache_dir));
  } catch (const Error& e) {
    CheckResult r;
    r.name = "ground-state-solve";
    r.passed = false;
    r.detail = std::string("error: ") + e.what();
    s.report.checks.push_back(r);
    s.report.all_passed = false;
    return s.report;
  }
  const auto& prof = *s.profile;
  const double p = cfg.p;

  s.check("ground-state-energy-identity", 1e-4, [&] {
    const double n2 = energy_norm_sq(prof, field_U(prof));
    return (n2 - integral_moment(prof, p + 1.0)) / n2;
  }, "(||U||^2 - int U^{p+1}) / ||U||^2");

  s.check("ground-state-pohozaev", 1e-3, [&] {
    const double n2 = energy_norm_sq(prof, field_U(prof));
    const double mass = integral_moment(prof, 2.0);
    const double pot = integral_moment(prof, p + 1.0);
    const double kin = n2 - mass;
    return (0.5 * kin + 1.5 * mass - 3.0 / (p + 1.0) * pot) / n2;
  }, "Pohozaev residual / ||U||^2");

  s.check("ground-state-decay-plateau", 0.01, [&] {
    double lo = 1e300, hi = 0.0;
    for (double r = 20.0; r <= 25.0; r += 0.5) {
      const double v = evaluate_with_tail(prof, r) * r * std::exp(r);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return hi / lo - 1.0;
  }, "tail plateau variation of U r e^r");

  s.check("nondegeneracy-Q-U", 1e-3, [&] {
    const double n2 = energy_norm_sq(prof, field_U(prof));
    return quadratic_form_Q(prof, field_U(prof)) / n2 - (1.0 - p);
  }, "Q[U]/||U||^2 - (1-p)");

  s.check("nondegeneracy-Q-U1", 1e-3, [&] {
    const auto u1 = field_U1(prof);
    return quadratic_form_Q(prof, u1) / energy_norm_sq(prof, u1);
  }, "Q[U_1]/||U_1||^2");

  InteractionFit fit;
  bool have_fit = false;
  s.check("interaction-exponential-slope", 0.02, [&] {
    fit = fit_interaction(prof, cfg.rel_tol, s.budget);
    have_fit = true;
    return fit.slope + 1.0;
  }, "slope of log(I(d) d) + 1");

  s.check("interaction-prefactor", 0.03, [&] {
    if (!have_fit) fit = fit_interaction(prof, cfg.rel_tol, s.budget);
    have_fit = true;
    return fit.c_star / fit.c_analytic - 1.0;
  }, "C*/C_analytic - 1");

  s.check("ring-inverse-distance-sum", 0.08, [&] {
    // Eq (A.11): pi r / (k log k) * sum 1/|P_1 - P_i| -> 1.
    const int k = 1000000;
    const double r = canonical_radius(cfg.potential.m, k);
    double sum = 0.0;
    for (int i = 1; i < k; ++i)
      sum += 1.0 / (2.0 * r * std::sin(M_PI * i / k));
    return M_PI * r / (k * std::log(double(k))) * sum - 1.0;
  }, "A.11 normalized ring sum - 1");

  ReducedConstants constants;
  EnergyBreakdown bd;
  bool have_bd = false;
  const InteractionFit* fitp = have_fit ? &fit : nullptr;
  const int k_corr = 8;
  const double r_corr = canonical_radius(cfg.potential.m, k_corr);

  s.check("energy-kinetic-gap", 0.10, [&] {
    constants = reduced_constants(prof, cfg.rel_tol, s.budget);
    auto ansatz = make_ansatz(k_corr, r_corr, s.profile, cfg.potential);
    bd = energy_direct(ansatz, constants, fitp, QuadratureSpec{}, s.budget);
    have_bd = true;
    return bd.kinetic_cross_direct / bd.kinetic_cross_asym - 1.0;
  }, "kinetic cross direct/asym - 1");

  s.check("energy-diagonal-nonlocal-gap", 0.20, [&] {
    if (!have_bd) throw Error("energy breakdown unavailable");
    return bd.nonlocal_diag_direct / bd.nonlocal_diag_asym - 1.0;
  }, "diagonal nonlocal direct/asym - 1");

  s.check("energy-cross-nonlocal-gap", 0.30, [&] {
    if (!have_bd) throw Error("energy breakdown unavailable");
    return bd.nonlocal_cross_direct / bd.nonlocal_cross_asym - 1.0;
  }, "self-cross nonlocal direct/asym - 1");

  s.check_flag("landscape-endpoint-signs", [&]() -> std::pair<bool, double> {
    const int k = 25;
    const auto win = radius_window(cfg.potential.m, cfg.beta, k);
    const double f_lo = reduced_energy_bar(k, win.lo, constants, prof, fitp,
                                           cfg.potential, cfg.rel_tol, s.budget);
    const double f_hi = reduced_energy_bar(k, win.hi, constants, prof, fitp,
                                           cfg.potential, cfg.rel_tol, s.budget);
    return {f_lo < 0.0 && f_hi > 0.0, f_lo};
  }, "F_bar at the left endpoint (right must be > 0)");

  s.check_flag("optimum-interior", [&]() -> std::pair<bool, double> {
    const int k = 25;
    const auto win = radius_window(cfg.potential.m, cfg.beta, k);
    const auto opt = find_optimal_radius(k, constants, prof, fitp,
                                         cfg.potential, win, cfg.rel_tol,
                                         s.budget);
    return {opt.interior, opt.r_k / (k * std::log(double(k)))};
  }, "maximizer ratio r_k/(k log k)");

  s.check_flag("residual-surrogate-decay", [&]() -> std::pair<bool, double> {
    auto probes = default_probes(s.profile);
    double val[2];
    const int ks[2] = {8, 16};
    for (int i = 0; i < 2; ++i) {
      auto ansatz = make_ansatz(ks[i], canonical_radius(cfg.potential.m, ks[i]),
                                s.profile, cfg.potential);
      val[i] = residual_surrogate(ansatz, probes, QuadratureSpec{}, s.budget);
    }
    const double slope =
        (std::log(val[1]) - std::log(val[0])) / std::log(2.0);
    return {slope <= -(cfg.potential.m - 0.5) + 0.25, slope};
  }, "residual log-log k-slope");

  s.check_flag("phi-seminorm-monotone", [&]() -> std::pair<bool, double> {
    auto a1 = make_ansatz(8, r_corr, s.profile, cfg.potential);
    auto a2 = make_ansatz(8, 2.0 * r_corr, s.profile, cfg.potential);
    const double v1 = phi_z_seminorm(a1, cfg.rel_tol, s.budget);
    const double v2 = phi_z_seminorm(a2, cfg.rel_tol, s.budget);
    return {v2 < v1 && v1 > 0.0, v2 / v1};
  }, "phi_z seminorm ratio at doubled radius");

  ProjectedSystem sys;
  bool have_sys = false;
  FixedPointResult fp;
  bool have_fp = false;

  s.check_flag("corrector-spectral-split", [&]() -> std::pair<bool, double> {
    auto ansatz = make_ansatz(k_corr, r_corr, s.profile, cfg.potential);
    auto basis = build_symmetric_basis(ansatz.config, s.profile, cfg.basis);
    sys = assemble_projected_system(basis, ansatz, QuadratureSpec{}, s.budget);
    have_sys = true;
    auto rep = spectral_split_check(sys);
    const bool near = std::abs(rep.bump_rayleigh - (1.0 - p)) < 0.1;
    return {rep.split_ok && near, rep.bump_rayleigh};
  }, "bump Rayleigh quotient");

  s.check_flag("corrector-constraint-defect", [&]() -> std::pair<bool, double> {
    if (!have_sys) throw Error("projected system unavailable");
    return {sys.constraint_defect_23 < 1e-8, sys.constraint_defect_23};
  }, "max |j = 2,3 constraint row entry|");

  s.check_flag("corrector-contraction", [&]() -> std::pair<bool, double> {
    if (!have_sys) throw Error("projected system unavailable");
    fp = solve_fixed_point(sys, s.budget);
    have_fp = true;
    double worst = 0.0;
    for (double r : fp.ratios) worst = std::max(worst, r);
    return {fp.converged && worst < 0.5, worst};
  }, "worst contraction ratio");

  s.check_flag("corrector-residual-drop", [&]() -> std::pair<bool, double> {
    if (!have_sys || !have_fp) throw Error("fixed point unavailable");
    auto probes = default_probes(s.profile);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(sys.basis.size());
    const double before =
        corrected_residual_surrogate(sys, zero, probes, s.budget);
    const double after =
        corrected_residual_surrogate(sys, fp.w, probes, s.budget);
    return {after <= 0.2 * before, after / before};
  }, "corrected/uncorrected residual");

  s.report.all_passed = true;
  for (const auto& c : s.report.checks)
    if (!c.passed) s.report.all_passed = false;
  return s.report;
}

std::string report_json(const VerifyReport& report, const RunConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["tool_version"] = kToolVersion;
  doc["config_hash"] = config_hash(cfg);
  doc["seed"] = cfg.seed;
  doc["all_passed"] = report.all_passed;
  doc["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : report.checks) {
    nlohmann::ordered_json jc;
    jc["name"] = c.name;
    jc["passed"] = c.passed;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", c.value);
    jc["value"] = buf;
    std::snprintf(buf, sizeof(buf), "%.17g", c.threshold);
    jc["threshold"] = buf;
    jc["detail"] = c.detail;
    doc["checks"].push_back(jc);
  }
  return doc.dump(2) + "\n";
}

} // namespace spmb
