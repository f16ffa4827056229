#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "spmb/corrector.hpp"
#include "spmb/energy.hpp"
#include "spmb/errors.hpp"
#include "spmb/geometry.hpp"
#include "spmb/interactions.hpp"
#include "spmb/runconfig.hpp"
#include "spmb/verify.hpp"
#include "spmb/version.hpp"

namespace {

using namespace spmb;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct Session {
  RunConfig cfg;
  std::string hash;
  std::shared_ptr<const GroundStateProfile> profile;

  const GroundStateProfile& ground_state() {
    if (!profile)
      profile = std::make_shared<const GroundStateProfile>(
          ground_state_cached(cfg.p, 1e-10, cfg.cache_dir));
    return *profile;
  }

  std::string header() const {
    std::ostringstream out;
    out << "# spmb " << kToolVersion << " config " << hash << " seed "
        << cfg.seed << "\n";
    return out.str();
  }

  std::filesystem::path out_path(const std::string& name) const {
    std::filesystem::create_directories(cfg.out_dir);
    return cfg.out_dir / name;
  }

  void write_json(const std::string& name, ordered_json doc) const {
    ordered_json full;
    full["tool_version"] = kToolVersion;
    full["config_hash"] = hash;
    full["seed"] = cfg.seed;
    for (auto& item : doc.items()) full[item.key()] = item.value();
    std::ofstream out(out_path(name));
    out << full.dump(2) << "\n";
    std::cout << "wrote " << (cfg.out_dir / name).string() << "\n";
  }
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

double canonical_radius(double m, int k) {
  return (m / M_PI) * k * std::log(static_cast<double>(k));
}

int cmd_ground_state(Session& s) {
  const auto& prof = s.ground_state();
  ordered_json doc;
  doc["p"] = s.cfg.p;
  doc["center_value"] = fmt(prof.center_value);
  doc["c_decay"] = fmt(prof.c_decay);
  doc["mass_integral"] = fmt(integral_moment(prof, 2.0));
  doc["power_integral"] = fmt(integral_moment(prof, s.cfg.p + 1.0));
  doc["ode_residual"] = fmt(max_ode_residual(prof));
  doc["cache_file"] =
      (s.cfg.cache_dir / profile_cache_name(s.cfg.p, prof.h, prof.r_max))
          .string();
  s.write_json("ground-state.json", doc);
  return kExitOk;
}

int cmd_constants(Session& s) {
  QuadratureBudget budget(s.cfg.budget);
  const auto& prof = s.ground_state();
  const auto constants = reduced_constants(prof, s.cfg.rel_tol, budget);
  ordered_json doc;
  doc["C0"] = fmt(constants.C0);
  doc["B1"] = fmt(constants.B1);
  doc["B2"] = fmt(constants.B2);
  doc["B3"] = fmt(constants.B3);
  doc["provenance"] = constants.provenance;
  doc["C_analytic"] = fmt(analytic_interaction_constant(prof));
  s.write_json("constants.json", doc);
  return kExitOk;
}

int cmd_interaction(Session& s) {
  QuadratureBudget budget(s.cfg.budget);
  const auto& prof = s.ground_state();
  const auto fit = fit_interaction(prof, s.cfg.rel_tol, budget);
  ordered_json doc;
  doc["c_star"] = fmt(fit.c_star);
  doc["c_analytic"] = fmt(fit.c_analytic);
  doc["slope"] = fmt(fit.slope);
  doc["fit_residual"] = fmt(fit.fit_residual);
  doc["separations"] = ordered_json::array();
  doc["values"] = ordered_json::array();
  for (double d : fit.separations) doc["separations"].push_back(fmt(d));
  for (double v : fit.values) doc["values"].push_back(fmt(v));
  s.write_json("interaction.json", doc);
  return kExitOk;
}

int cmd_landscape(Session& s, int k) {
  QuadratureBudget budget(s.cfg.budget);
  const auto& prof = s.ground_state();
  const auto constants = reduced_constants(prof, s.cfg.rel_tol, budget);
  const auto fit = fit_interaction(prof, s.cfg.rel_tol, budget);
  const auto win = radius_window(s.cfg.potential.m, s.cfg.beta, k);
  const auto path = s.out_path("landscape_k" + std::to_string(k) + ".csv");
  std::ofstream out(path);
  out << s.header();
  out << "k,r,F_reduced,F_bar,kinetic_mass,nonlocal,nonlinear,neglected_bound\n";
  for (int i = 0; i < s.cfg.r_samples; ++i) {
    const double r =
        win.lo + (win.hi - win.lo) * i / double(s.cfg.r_samples - 1);
    const auto pt = landscape_point(k, r, constants, prof, &fit,
                                    s.cfg.potential, s.cfg.rel_tol, budget);
    out << k << ',' << fmt(pt.r) << ',' << fmt(pt.f_reduced) << ','
        << fmt(pt.f_bar) << ',' << fmt(pt.kinetic_mass) << ','
        << fmt(pt.nonlocal) << ',' << fmt(pt.nonlinear) << ','
        << fmt(pt.neglected_bound) << '\n';
    out.flush();
  }
  std::cout << "wrote " << path.string() << "\n";
  return kExitOk;
}

// Rows already present in a sweep file under the same config header.
std::set<int> existing_rows(const std::filesystem::path& path,
                            const std::string& header) {
  std::set<int> done;
  std::ifstream in(path);
  if (!in) return done;
  std::string line;
  if (!std::getline(in, line) || line + "\n" != header) return done;
  std::getline(in, line);  // schema
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    try {
      done.insert(std::stoi(line.substr(0, line.find(','))));
    } catch (...) {
    }
  }
  return done;
}

struct SweepRow {
  int k = 0;
  std::string text;
};

// One sweep row; `optimum` switches between the optimal-radius sweep and the
// canonical-radius residual sweep.
SweepRow sweep_row(const RunConfig& cfg,
                   std::shared_ptr<const GroundStateProfile> profile,
                   const ReducedConstants& constants, const InteractionFit& fit,
                   int k, bool optimum, std::uint64_t row_budget) {
  QuadratureBudget budget(row_budget);
  const auto& prof = *profile;
  double r_k, ratio;
  bool interior;
  if (optimum) {
    const auto win = radius_window(cfg.potential.m, cfg.beta, k);
    const auto opt = find_optimal_radius(k, constants, prof, &fit,
                                         cfg.potential, win, cfg.rel_tol,
                                         budget);
    r_k = opt.r_k;
    interior = opt.interior;
  } else {
    r_k = canonical_radius(cfg.potential.m, k);
    interior = true;
  }
  ratio = r_k / (k * std::log(double(k)));

  double w_norm = std::nan("");
  double res_before = std::nan("");
  double res_after = std::nan("");
  auto ansatz = make_ansatz(k, r_k, profile, cfg.potential);
  auto probes = default_probes(profile);
  res_before = residual_surrogate(ansatz, probes, QuadratureSpec{}, budget);
  if (cfg.corrector) {
    auto basis = build_symmetric_basis(ansatz.config, profile, cfg.basis);
    auto sys = assemble_projected_system(basis, ansatz, QuadratureSpec{},
                                         budget);
    auto fp = solve_fixed_point(sys, budget);
    w_norm = fp.w_norm;
    res_after = corrected_residual_surrogate(sys, fp.w, probes, budget);
  }

  SweepRow row;
  row.k = k;
  std::ostringstream out;
  out << k << ',' << fmt(r_k) << ',' << fmt(ratio) << ',' << (interior ? 1 : 0)
      << ',' << fmt(w_norm) << ',' << fmt(res_before) << ',' << fmt(res_after);
  row.text = out.str();
  return row;
}

int cmd_sweep(Session& s, bool optimum, int jobs) {
  QuadratureBudget budget(s.cfg.budget);
  auto profile = std::make_shared<const GroundStateProfile>(
      ground_state_cached(s.cfg.p, 1e-10, s.cfg.cache_dir));
  const auto constants = reduced_constants(*profile, s.cfg.rel_tol, budget);
  const auto fit = fit_interaction(*profile, s.cfg.rel_tol, budget);

  const std::string name =
      optimum ? "optimum_sweep.csv" : "residual_sweep.csv";
  const auto path = s.out_path(name);
  const std::string header = s.header();
  const auto done = existing_rows(path, header);

  std::vector<int> todo;
  for (int k : s.cfg.k_list)
    if (!done.count(k)) todo.push_back(k);

  std::ofstream out;
  if (done.empty()) {
    out.open(path, std::ios::trunc);
    out << header;
    out << "k,r_k,ratio,interior,w_norm,residual_before,residual_after\n";
  } else {
    out.open(path, std::ios::app);
    std::cout << "resuming: " << done.size() << " rows present\n";
  }
  out.flush();

  // Per-row budget slices keep results independent of the job count.
  const std::uint64_t row_budget =
      s.cfg.budget == 0 || todo.empty() ? s.cfg.budget
                                        : s.cfg.budget / todo.size();
  for (std::size_t base = 0; base < todo.size();
       base += static_cast<std::size_t>(jobs)) {
    const std::size_t end =
        std::min(todo.size(), base + static_cast<std::size_t>(jobs));
    std::vector<std::future<SweepRow>> batch;
    for (std::size_t i = base; i < end; ++i)
      batch.push_back(std::async(std::launch::async, sweep_row,
                                 std::cref(s.cfg), profile,
                                 std::cref(constants), std::cref(fit), todo[i],
                                 optimum, row_budget));
    for (auto& fut : batch) {
      const SweepRow row = fut.get();
      out << row.text << '\n';
      out.flush();
      std::cout << "k=" << row.k << " done\n";
    }
  }
  std::cout << "wrote " << path.string() << "\n";
  return kExitOk;
}

int cmd_correct(Session& s, int k) {
  QuadratureBudget budget(s.cfg.budget);
  auto profile = std::make_shared<const GroundStateProfile>(
      ground_state_cached(s.cfg.p, 1e-10, s.cfg.cache_dir));
  const double r = canonical_radius(s.cfg.potential.m, k);
  auto ansatz = make_ansatz(k, r, profile, s.cfg.potential);
  auto basis = build_symmetric_basis(ansatz.config, profile, s.cfg.basis);
  auto sys = assemble_projected_system(basis, ansatz, QuadratureSpec{}, budget);
  auto rep = spectral_split_check(sys);
  auto fp = solve_fixed_point(sys, budget);
  auto probes = default_probes(profile);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(sys.basis.size());
  const double before = corrected_residual_surrogate(sys, zero, probes, budget);
  const double after = corrected_residual_surrogate(sys, fp.w, probes, budget);

  ordered_json doc;
  doc["k"] = k;
  doc["r"] = fmt(r);
  doc["eigenvalues"] = ordered_json::array();
  for (double e : rep.eigenvalues) doc["eigenvalues"].push_back(fmt(e));
  doc["bump_rayleigh"] = fmt(rep.bump_rayleigh);
  doc["c1_hat"] = fmt(rep.c1_hat);
  doc["c2_hat"] = fmt(rep.c2_hat);
  doc["cbar_hat"] = fmt(rep.cbar_hat);
  doc["split_ok"] = rep.split_ok;
  doc["step_norms"] = ordered_json::array();
  for (double v : fp.step_norms) doc["step_norms"].push_back(fmt(v));
  doc["ratios"] = ordered_json::array();
  for (double v : fp.ratios) doc["ratios"].push_back(fmt(v));
  doc["converged"] = fp.converged;
  doc["damped"] = fp.damped;
  doc["w_norm"] = fmt(fp.w_norm);
  doc["residual_before"] = fmt(before);
  doc["residual_after"] = fmt(after);
  s.write_json("correct_k" + std::to_string(k) + ".json", doc);
  return kExitOk;
}

int cmd_verify(Session& s) {
  const auto report = run_verify(s.cfg);
  for (const auto& c : report.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.detail
              << "\n";
  std::ofstream out(s.out_path("verify.json"));
  out << report_json(report, s.cfg);
  std::cout << "wrote " << (s.cfg.out_dir / "verify.json").string() << "\n";
  return report.all_passed ? kExitOk : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-bump solution toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int jobs = 1;
  std::int64_t budget = -1;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--jobs", jobs, "concurrent sweep rows")
      ->check(CLI::PositiveNumber);
  app.add_option("--budget", budget,
                 "quadrature evaluation cap (overrides config)");

  auto* sc_ground = app.add_subcommand("ground-state", "solve and cache U");
  auto* sc_constants =
      app.add_subcommand("constants", "reduced energy constants");
  auto* sc_interaction =
      app.add_subcommand("interaction", "bump interaction fit");
  auto* sc_landscape =
      app.add_subcommand("landscape", "reduced energy over the window S_k");
  int landscape_k = 0;
  sc_landscape->add_option("--k", landscape_k, "bump count")
      ->required()
      ->check(CLI::Range(2, 1000000));
  auto* sc_optimum =
      app.add_subcommand("optimum-sweep", "optimal radius per k in k_list");
  auto* sc_residual = app.add_subcommand(
      "residual-sweep", "residual surrogate per k at the canonical radius");
  auto* sc_correct = app.add_subcommand("correct", "Galerkin corrector report");
  int correct_k = 8;
  sc_correct->add_option("--k", correct_k, "bump count")
      ->check(CLI::Range(2, 1000000));
  auto* sc_verify = app.add_subcommand("verify", "run the full check suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Session session;
  try {
    if (!config_path.empty()) session.cfg = parse_config(config_path);
    if (!out_dir.empty()) session.cfg.out_dir = out_dir;
    if (budget >= 0) session.cfg.budget = static_cast<std::uint64_t>(budget);
    session.hash = config_hash(session.cfg);
  } catch (const ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*sc_ground) return cmd_ground_state(session);
    if (*sc_constants) return cmd_constants(session);
    if (*sc_interaction) return cmd_interaction(session);
    if (*sc_landscape) return cmd_landscape(session, landscape_k);
    if (*sc_optimum) return cmd_sweep(session, true, jobs);
    if (*sc_residual) return cmd_sweep(session, false, jobs);
    if (*sc_correct) return cmd_correct(session, correct_k);
    if (*sc_verify) return cmd_verify(session);
  } catch (const QuadratureBudgetExceeded& e) {
    std::cerr << "numeric budget error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
