#include "spmb/groundstate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spmb/errors.hpp"
#include "spmb/numerics.hpp"
#include "spmb/quadrature.hpp"
#include "spmb/version.hpp"

namespace spmb {

namespace {

// Odd extension keeps u^p real if an RK4 substep dips below zero.
inline double upow(double u, double p) {
  return u >= 0.0 ? std::pow(u, p) : -std::pow(-u, p);
}

struct State {
  double u, w;  // w = u'
};

inline State rhs(double r, const State& s, double p) {
  return {s.w, s.u - upow(s.u, p) - 2.0 / r * s.w};
}

inline State rk4_step(double r, const State& s, double h, double p) {
  const State k1 = rhs(r, s, p);
  const State k2 = rhs(r + 0.5 * h, {s.u + 0.5 * h * k1.u, s.w + 0.5 * h * k1.w}, p);
  const State k3 = rhs(r + 0.5 * h, {s.u + 0.5 * h * k2.u, s.w + 0.5 * h * k2.w}, p);
  const State k4 = rhs(r + h, {s.u + h * k3.u, s.w + h * k3.w}, p);
  return {s.u + h / 6.0 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u),
          s.w + h / 6.0 * (k1.w + 2 * k2.w + 2 * k3.w + k4.w)};
}

// Integrate from the origin, recording (u, du) at the grid nodes.  Stops early
// and reports the event radius on a crossing or interior rebound.
enum class TraceStop { Crossed, Rebounded, Reached };

TraceStop trace(double p, double u0, double h, double r_max,
                std::vector<double>& u, std::vector<double>& du,
                double& r_event) {
  const std::size_t n = static_cast<std::size_t>(std::llround(r_max / h)) + 1;
  u.assign(1, u0);
  du.assign(1, 0.0);
  u.reserve(n);
  du.reserve(n);
  // Series start: u = u0 + c2 r^2 + c4 r^4 + O(r^6).
  const double c2 = (u0 - upow(u0, p)) / 6.0;
  const double c4 = (1.0 - p * upow(u0, p - 1.0)) * c2 / 20.0;
  State s{u0 + (c2 + c4 * h * h) * h * h, (2.0 * c2 + 4.0 * c4 * h * h) * h};
  double r = h;
  u.push_back(s.u);
  du.push_back(s.w);
  for (std::size_t i = 2; i < n; ++i) {
    s = rk4_step(r, s, h, p);
    r += h;
    if (s.u <= 0.0) {
      r_event = r;
      return TraceStop::Crossed;
    }
    if (s.w >= 0.0 && s.u < 1.0) {
      r_event = r;
      return TraceStop::Rebounded;
    }
    u.push_back(s.u);
    du.push_back(s.w);
  }
  r_event = r;
  return TraceStop::Reached;
}

constexpr double kSpliceThreshold = 1e-5;

} // namespace

ShotOutcome shoot(double p, double u0, double h, double r_max) {
  if (u0 <= 0.0 || h <= 0.0 || r_max < 20.0)
    throw Error("shoot: need u0 > 0, h > 0, r_max >= 20");
  std::vector<double> u, du;
  double r_event = 0.0;
  switch (trace(p, u0, h, r_max, u, du, r_event)) {
    case TraceStop::Crossed:
      return {ShotKind::Crossed, r_event, {}};
    case TraceStop::Rebounded:
      return {ShotKind::Rebounded, r_event, {}};
    case TraceStop::Reached:
      break;
  }
  // Reached r_max positive: Decayed only if genuinely small and still falling.
  const std::size_t n = u.size();
  bool decreasing = true;
  for (std::size_t i = n - n / 10; i < n; ++i)
    if (u[i] >= u[i - 1]) decreasing = false;
  if (u.back() < 1e-8 && decreasing) {
    GroundStateProfile prof;
    prof.p = p;
    prof.h = h;
    prof.r_max = r_max;
    prof.u = std::move(u);
    prof.du = std::move(du);
    prof.center_value = u0;
    const double rm = prof.r_max;
    prof.c_decay = prof.u.back() * rm * std::exp(rm);
    return {ShotKind::Decayed, r_max, std::move(prof)};
  }
  throw AmbiguousClassification(
      "shoot: trajectory neither crossed, rebounded, nor decayed by r_max");
}

GroundStateProfile find_ground_state(double p, double tol, double h,
                                     double r_max) {
  if (!(p > 1.0 && p < 5.0))
    throw Error("find_ground_state: need 1 < p < 5");
  if (tol <= 0.0) throw Error("find_ground_state: tol must be positive");

  auto classify = [&](double u0) {
    std::vector<double> u, du;
    double r_event = 0.0;
    return trace(p, u0, h, r_max, u, du, r_event);
  };

  // u0 <= 1 can never cross (u - u^p > 0 pushes the solution up), so the left
  // end needs no shot.  Grow the right end until it overshoots.
  double lo = 1.0, hi = 2.0;
  while (classify(hi) != TraceStop::Crossed) {
    hi *= 2.0;
    if (hi > 1e6)
      throw NoBracket("find_ground_state: no crossing found below u0 = 1e6");
  }
  // Bisect well past the requested tol: the residual bracket error grows like
  // e^r along the trajectory, so only a near-machine-width bracket leaves a
  // clean exponential tail to splice against.
  (void)tol;
  for (int it = 0; it < 200 && hi - lo > 8e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (classify(mid) == TraceStop::Crossed)
      hi = mid;
    else
      lo = mid;
  }
  const double u0 = 0.5 * (lo + hi);

  GroundStateProfile prof;
  prof.p = p;
  prof.h = h;
  prof.r_max = r_max;
  prof.center_value = u0;
  double r_event = 0.0;
  const TraceStop stop = trace(p, u0, h, r_max, prof.u, prof.du, r_event);
  // Locate the splice node: first grid point below the threshold.
  std::size_t i_s = prof.u.size();
  for (std::size_t i = 0; i < prof.u.size(); ++i)
    if (prof.u[i] < kSpliceThreshold) {
      i_s = i;
      break;
    }
  if (i_s == prof.u.size())
    throw AmbiguousClassification(
        stop == TraceStop::Reached
            ? "find_ground_state: profile never reached the splice threshold"
            : "find_ground_state: trajectory left the decay regime before the "
              "splice threshold");
  const double r_s = static_cast<double>(i_s) * h;
  const double C = prof.u[i_s] * r_s * std::exp(r_s);
  prof.c_decay = C;
  // Replace everything past the splice node by the exact tail solution of the
  // linearized equation u'' + (2/r)u' - u = 0.
  const std::size_t n = static_cast<std::size_t>(std::llround(r_max / h)) + 1;
  prof.u.resize(n);
  prof.du.resize(n);
  for (std::size_t i = i_s; i < n; ++i) {
    const double r = static_cast<double>(i) * h;
    const double e = C * std::exp(-r);
    prof.u[i] = e / r;
    prof.du[i] = -e * (1.0 / r + 1.0 / (r * r));
  }
  return prof;
}

double evaluate_with_tail(const GroundStateProfile& prof, double r) {
  if (r < 0.0) throw Error("evaluate_with_tail: r must be >= 0");
  if (r > prof.r_max) return prof.c_decay * std::exp(-r) / r;
  return interp_cubic_uniform(prof.u, prof.h, r);
}

double evaluate_du_with_tail(const GroundStateProfile& prof, double r) {
  if (r < 0.0) throw Error("evaluate_du_with_tail: r must be >= 0");
  if (r > prof.r_max)
    return -prof.c_decay * std::exp(-r) * (1.0 / r + 1.0 / (r * r));
  return interp_cubic_uniform(prof.du, prof.h, r);
}

double max_ode_residual(const GroundStateProfile& prof) {
  const std::size_t n = prof.size();
  const double h = prof.h;
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double r = prof.r_at(i);
    const double upp = (-prof.u[i + 2] + 16 * prof.u[i + 1] - 30 * prof.u[i] +
                        16 * prof.u[i - 1] - prof.u[i - 2]) /
                       (12 * h * h);
    const double up = (-prof.u[i + 2] + 8 * prof.u[i + 1] - 8 * prof.u[i - 1] +
                       prof.u[i - 2]) /
                      (12 * h);
    const double res =
        upp + 2.0 / r * up - prof.u[i] + upow(prof.u[i], prof.p);
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

double integral_moment(const GroundStateProfile& prof, double q) {
  if (q < 1.0) throw Error("integral_moment: need q >= 1");
  const std::size_t n = prof.size();
  std::vector<double> integrand(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = prof.r_at(i);
    integrand[i] = std::pow(prof.u[i], q) * r * r;
  }
  double body = simpson_uniform(integrand, prof.h);
  // Analytic-tail contribution beyond r_max (astronomically small at the
  // default r_max, kept for correctness at coarse truncations).
  QuadratureBudget unlimited;
  const double C = prof.c_decay;
  const double rm = prof.r_max;
  const double tail = integrate_gl_panels(
      [&](double r) {
        return std::pow(C * std::exp(-r) / r, q) * r * r;
      },
      rm, rm + 80.0 / q, 16, 12, unlimited);
  return 4.0 * M_PI * (body + tail);
}

RadialAngularField field_U(const GroundStateProfile& prof) {
  return {prof.u, prof.du, 0};
}

RadialAngularField field_U1(const GroundStateProfile& prof) {
  RadialAngularField v;
  v.l = 1;
  v.f = prof.du;
  const std::size_t n = prof.size();
  v.df.resize(n);
  // u'' from the ODE itself; series value at the origin.
  v.df[0] = (prof.center_value - upow(prof.center_value, prof.p)) / 3.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double r = prof.r_at(i);
    v.df[i] = prof.u[i] - upow(prof.u[i], prof.p) - 2.0 / r * prof.du[i];
  }
  return v;
}

namespace {

double radial_form(const GroundStateProfile& prof, const RadialAngularField& a,
                   const RadialAngularField& b, bool with_gradient,
                   double potential_weight_exponent) {
  // A_l [ \int (a' b' [grad] + a b (1 - weight U^{p-1})) r^2 dr
  //       + l(l+1) \int a b dr [grad] ].
  const std::size_t n = prof.size();
  const double A_l = 4.0 * M_PI / (2.0 * a.l + 1.0);
  std::vector<double> g0(n), g1(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = prof.r_at(i);
    const double w = potential_weight_exponent == 0.0
                         ? 0.0
                         : std::pow(prof.u[i], potential_weight_exponent);
    double val = a.f[i] * b.f[i] * (1.0 - prof.p * w);
    if (with_gradient) val += a.df[i] * b.df[i];
    g0[i] = val * r * r;
    g1[i] = a.f[i] * b.f[i];
  }
  double result = simpson_uniform(g0, prof.h);
  if (with_gradient && a.l > 0)
    result += a.l * (a.l + 1.0) * simpson_uniform(g1, prof.h);
  return A_l * result;
}

} // namespace

double quadratic_form_Q(const GroundStateProfile& prof,
                        const RadialAngularField& v) {
  return radial_form(prof, v, v, true, prof.p - 1.0);
}

double energy_norm_sq(const GroundStateProfile& prof,
                      const RadialAngularField& v) {
  return radial_form(prof, v, v, true, 0.0);
}

double energy_inner(const GroundStateProfile& prof,
                    const RadialAngularField& a, const RadialAngularField& b) {
  if (a.l != b.l) return 0.0;
  return radial_form(prof, a, b, true, 0.0);
}

double q_inner(const GroundStateProfile& prof, const RadialAngularField& a,
               const RadialAngularField& b) {
  if (a.l != b.l) return 0.0;
  return radial_form(prof, a, b, true, prof.p - 1.0);
}

double weighted_inner(const GroundStateProfile& prof,
                      const RadialAngularField& a,
                      const RadialAngularField& b) {
  if (a.l != b.l) return 0.0;
  const std::size_t n = prof.size();
  const double A_l = 4.0 * M_PI / (2.0 * a.l + 1.0);
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = prof.r_at(i);
    g[i] = std::pow(prof.u[i], prof.p - 1.0) * a.f[i] * b.f[i] * r * r;
  }
  return A_l * simpson_uniform(g, prof.h);
}

void save_profile(const GroundStateProfile& prof,
                  const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("save_profile: cannot open " + tmp.string());
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "SPMB-U v1 p=%.17g h=%.17g rmax=%.17g u0=%.17g C=%.17g\n",
                  prof.p, prof.h, prof.r_max, prof.center_value, prof.c_decay);
    out << buf;
    for (std::size_t i = 0; i < prof.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", prof.r_at(i),
                    prof.u[i], prof.du[i]);
      out << buf;
    }
    if (!out) throw Error("save_profile: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

GroundStateProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_profile: cannot open " + path.string());
  std::string header;
  if (!std::getline(in, header))
    throw CacheFormatError("load_profile: empty file " + path.string());
  std::istringstream hs(header);
  std::string magic, version;
  hs >> magic >> version;
  if (magic != "SPMB-U" || version != "v1")
    throw CacheFormatError("load_profile: unsupported header '" + header + "'");
  GroundStateProfile prof;
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw CacheFormatError("load_profile: malformed header field '" + tok + "'");
    const std::string key = tok.substr(0, eq);
    const double val = std::stod(tok.substr(eq + 1));
    if (key == "p")
      prof.p = val;
    else if (key == "h")
      prof.h = val;
    else if (key == "rmax")
      prof.r_max = val;
    else if (key == "u0")
      prof.center_value = val;
    else if (key == "C")
      prof.c_decay = val;
    else
      throw CacheFormatError("load_profile: unknown header key '" + key + "'");
  }
  if (prof.p == 0.0 || prof.h == 0.0 || prof.r_max == 0.0)
    throw CacheFormatError("load_profile: incomplete header");
  double r, u, du;
  while (in >> r >> u >> du) {
    prof.u.push_back(u);
    prof.du.push_back(du);
  }
  const std::size_t expected =
      static_cast<std::size_t>(std::llround(prof.r_max / prof.h)) + 1;
  if (prof.u.size() != expected)
    throw CacheFormatError("load_profile: row count mismatch in " +
                           path.string());
  return prof;
}

std::string profile_cache_name(double p, double h, double r_max) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "U_p%.10g_h%.10g_rmax%.10g_iv%d.txt", p, h,
                r_max, kIntegratorVersion);
  return buf;
}

GroundStateProfile ground_state_cached(double p, double tol,
                                       const std::filesystem::path& cache_dir,
                                       double h, double r_max) {
  std::filesystem::create_directories(cache_dir);
  const auto path = cache_dir / profile_cache_name(p, h, r_max);
  if (std::filesystem::exists(path)) {
    try {
      GroundStateProfile prof = load_profile(path);
      if (prof.p == p && prof.h == h && prof.r_max == r_max) return prof;
    } catch (const CacheFormatError&) {
      // Fall through and recompute.
    }
  }
  GroundStateProfile prof = find_ground_state(p, tol, h, r_max);
  save_profile(prof, path);
  return prof;
}

} // namespace spmb
