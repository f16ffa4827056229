#include "spmb/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spmb/errors.hpp"
#include "spmb/numerics.hpp"

namespace spmb {

double PotentialModel::operator()(double r) const {
  switch (variant) {
    case PotentialVariant::ShiftedPower:
      return a / std::pow(1.0 + r, m);
    case PotentialVariant::SoftPower:
      return a / (1.0 + std::pow(r, m));
    case PotentialVariant::CappedPower: {
      if (r <= 0.0) return a * cap;
      return std::min(a * cap, a / std::pow(r, m));
    }
  }
  return 0.0;
}

double TailDescriptor::operator()(double r) const {
  switch (kind) {
    case TailKind::Zero:
      return 0.0;
    case TailKind::ExpPower:
      return C * std::exp(-alpha * r) * std::pow(r, power);
    case TailKind::InversePower:
      return C * std::pow(r, -power);
  }
  return 0.0;
}

double RadialDensity::operator()(double r) const {
  if (r < 0.0) throw Error("RadialDensity: r must be >= 0");
  if (r > r_max) return tail(r);
  return interp_cubic_uniform(f, h, r);
}

double RadialDensity::support_radius() const {
  switch (tail.kind) {
    case TailKind::Zero:
      return r_max;
    case TailKind::ExpPower:
      return r_max + 40.0 / std::max(tail.alpha, 0.1);
    case TailKind::InversePower:
      return 100.0 * r_max;
  }
  return r_max;
}

RadialDensity make_density(const std::function<double(double)>& fn, double h,
                           double r_max, TailKind kind, double alpha,
                           double power) {
  RadialDensity d;
  d.h = h;
  d.r_max = r_max;
  const std::size_t n = static_cast<std::size_t>(std::llround(r_max / h)) + 1;
  d.f.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.f[i] = fn(d.r_at(i));
  d.tail.kind = kind;
  d.tail.alpha = alpha;
  d.tail.power = power;
  const double last = d.f.back();
  double base = 1.0;
  if (kind == TailKind::ExpPower)
    base = std::exp(-alpha * r_max) * std::pow(r_max, power);
  else if (kind == TailKind::InversePower)
    base = std::pow(r_max, -power);
  d.tail.C = (kind == TailKind::Zero || base == 0.0) ? 0.0 : last / base;
  return d;
}

RadialDensity density_V_u_sq(const GroundStateProfile& u,
                             const PotentialModel& V) {
  return make_density(
      [&](double r) {
        const double uu = evaluate_with_tail(u, r);
        return V(r) * uu * uu;
      },
      u.h, u.r_max, TailKind::ExpPower, 2.0, -(V.m + 2.0));
}

RadialDensity density_u_sq(const GroundStateProfile& u) {
  return make_density(
      [&](double r) {
        const double uu = evaluate_with_tail(u, r);
        return uu * uu;
      },
      u.h, u.r_max, TailKind::ExpPower, 2.0, -2.0);
}

namespace {

// \int_r^inf tail(t) t^k dt; analytic for inverse-power tails, panelled
// Gauss-Legendre over the decay length otherwise.
double tail_moment(const TailDescriptor& tail, double r, int k) {
  switch (tail.kind) {
    case TailKind::Zero:
      return 0.0;
    case TailKind::InversePower: {
      const double e = tail.power - k - 1.0;  // integrand ~ t^{-(e+1)}
      if (e <= 0.0)
        throw Error("tail_moment: divergent inverse-power tail moment");
      return tail.C * std::pow(r, -e) / e;
    }
    case TailKind::ExpPower: {
      QuadratureBudget unlimited;
      const double span = 60.0 / std::max(tail.alpha, 0.1);
      return integrate_gl_panels(
          [&](double t) { return tail(t) * std::pow(t, k); }, r, r + span, 12,
          10, unlimited);
    }
  }
  return 0.0;
}

// Cumulative integral of a grid-sampled function by 4-point Newton-Cotes on
// each interval (third-order stencils at the ends).
std::vector<double> cumulative_integral(const std::vector<double>& g, double h) {
  const std::size_t n = g.size();
  std::vector<double> out(n, 0.0);
  if (n < 4) {
    for (std::size_t i = 1; i < n; ++i)
      out[i] = out[i - 1] + 0.5 * h * (g[i - 1] + g[i]);
    return out;
  }
  for (std::size_t i = 1; i < n; ++i) {
    double seg;
    if (i == 1)
      seg = h * (9 * g[0] + 19 * g[1] - 5 * g[2] + g[3]) / 24.0;
    else if (i == n - 1)
      seg = h * (g[n - 4] - 5 * g[n - 3] + 19 * g[n - 2] + 9 * g[n - 1]) / 24.0;
    else
      seg = h * (-g[i - 2] + 13 * g[i - 1] + 13 * g[i] - g[i + 1]) / 24.0;
    out[i] = out[i - 1] + seg;
  }
  return out;
}

} // namespace

NewtonPotential::NewtonPotential(RadialDensity source)
    : source_(std::move(source)) {
  const std::size_t n = source_.f.size();
  std::vector<double> g2(n), g1(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = source_.r_at(i);
    g2[i] = source_.f[i] * r * r;
    g1[i] = source_.f[i] * r;
  }
  m_in_ = cumulative_integral(g2, source_.h);
  const std::vector<double> cum1 = cumulative_integral(g1, source_.h);
  const double t1 = tail_moment(source_.tail, source_.r_max, 1);
  const double t2 = tail_moment(source_.tail, source_.r_max, 2);
  tail_charge_ = 4.0 * M_PI * t2;
  charge_ = 4.0 * M_PI * m_in_.back() + tail_charge_;
  phi_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = source_.r_at(i);
    const double out_part = (cum1.back() - cum1[i]) + t1;
    const double in_part = (i == 0) ? 0.0 : m_in_[i] / r;
    phi_[i] = 4.0 * M_PI * (in_part + out_part);
  }
  if (source_.tail.kind == TailKind::ExpPower) {
    const std::size_t nb = 257;
    const double span = source_.support_radius() - source_.r_max;
    band_h_ = span / (nb - 1);
    band_t1_.resize(nb);
    band_t2_.resize(nb);
    for (std::size_t i = 0; i < nb; ++i) {
      const double r = source_.r_max + band_h_ * i;
      band_t1_[i] = tail_moment(source_.tail, r, 1);
      band_t2_[i] = tail_moment(source_.tail, r, 2);
    }
  }
}

void NewtonPotential::tail_moments(double r, double* t1, double* t2) const {
  if (source_.tail.kind == TailKind::ExpPower) {
    const double x = r - source_.r_max;
    if (x >= band_h_ * (band_t1_.size() - 1)) {  // past the support radius
      *t1 = 0.0;
      *t2 = 0.0;
      return;
    }
    *t1 = interp_cubic_uniform(band_t1_, band_h_, x);
    *t2 = interp_cubic_uniform(band_t2_, band_h_, x);
    return;
  }
  *t1 = tail_moment(source_.tail, r, 1);
  *t2 = tail_moment(source_.tail, r, 2);
}

double NewtonPotential::operator()(double r) const {
  if (r < 0.0) throw Error("NewtonPotential: r must be >= 0");
  if (r <= source_.r_max) return interp_cubic_uniform(phi_, source_.h, r);
  double t1, t2;
  tail_moments(r, &t1, &t2);
  return (charge_ - 4.0 * M_PI * t2) / r + 4.0 * M_PI * t1;
}

double NewtonPotential::derivative(double r) const {
  if (r <= 0.0) return 0.0;
  if (r <= source_.r_max) {
    const double min_r = interp_cubic_uniform(m_in_, source_.h, r);
    return -4.0 * M_PI * min_r / (r * r);
  }
  double t1, t2;
  tail_moments(r, &t1, &t2);
  (void)t1;
  return -(charge_ - 4.0 * M_PI * t2) / (r * r);
}

double newton_potential_radial(const RadialDensity& f, double r) {
  if (r < 0.0) throw Error("newton_potential_radial: r must be >= 0");
  QuadratureBudget budget(20000000);
  const double rm = f.r_max;
  const double rcut = std::min(r, rm);
  double in_part = 0.0;
  if (r > 0.0) {
    in_part = integrate_adaptive([&](double t) { return f(t) * t * t; }, 0.0,
                                 rcut, 1e-10, 1e-16, budget);
    if (r > rm) in_part += tail_moment(f.tail, rm, 2) - tail_moment(f.tail, r, 2);
    in_part /= r;
  }
  double out_part = 0.0;
  if (r < rm)
    out_part = integrate_adaptive([&](double t) { return f(t) * t; }, r, rm,
                                  1e-10, 1e-16, budget);
  out_part += tail_moment(f.tail, std::max(r, rm), 1);
  if (r == 0.0) {
    // Limit value: 4 pi \int_0^inf f t dt.
    return 4.0 * M_PI * out_part;
  }
  return 4.0 * M_PI * (in_part + out_part);
}

RadialDensity phi_of_radial_source(const GroundStateProfile& u,
                                   const PotentialModel& V,
                                   double grid_stretch) {
  const NewtonPotential phi(density_V_u_sq(u, V));
  RadialDensity out;
  out.h = u.h * grid_stretch;
  out.r_max = u.r_max * grid_stretch;
  const std::size_t n =
      static_cast<std::size_t>(std::llround(out.r_max / out.h)) + 1;
  out.f.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.f[i] = phi(out.r_at(i));
  out.tail.kind = TailKind::InversePower;
  out.tail.power = 1.0;
  out.tail.C = out.f.back() * out.r_max;
  return out;
}

double coulomb_pair_integral(const RadialDensity& f, const RadialDensity& g,
                             double d, double rel_tol,
                             QuadratureBudget& budget) {
  if (d < 0.0) throw Error("coulomb_pair_integral: d must be >= 0");
  const NewtonPotential phi_f(f);
  const double s_max = g.support_radius();
  // Rough scale for the absolute tolerance floor.
  const double scale =
      phi_f.total_charge() * phi_f.total_charge() / std::max(1.0, d);
  auto inner = [&](double s) {
    if (s == 0.0) return 2.0 * phi_f(d);
    return integrate_adaptive(
        [&](double c) {
          const double rr = std::sqrt(
              std::max(0.0, s * s + d * d - 2.0 * s * d * c));
          return phi_f(rr);
        },
        -1.0, 1.0, 0.1 * rel_tol, 1e-14, budget);
  };
  // Unit-width outer panels: a single adaptive pass over [0, s_max] can miss
  // a density concentrated well inside the first subdivision.
  auto outer = [&](double s) { return g(s) * s * s * inner(s); };
  const int n_panels = std::max(1, static_cast<int>(std::ceil(s_max)));
  const double w = s_max / n_panels;
  std::vector<double> parts(n_panels);
  for (int i = 0; i < n_panels; ++i)
    parts[i] = integrate_adaptive(outer, i * w, (i + 1) * w, rel_tol,
                                  1e-12 * std::abs(scale), budget);
  return 2.0 * M_PI * pairwise_sum(parts);
}

double potential_seminorm_diff(const NewtonPotential& a,
                               const NewtonPotential& b, double r_lim) {
  QuadratureBudget budget(20000000);
  const double val = integrate_adaptive(
      [&](double r) {
        const double dd = a.derivative(r) - b.derivative(r);
        return dd * dd * r * r;
      },
      0.0, r_lim, 1e-9, 1e-18, budget);
  return std::sqrt(4.0 * M_PI * val);
}

void save_density(const RadialDensity& d, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("save_density: cannot open " + tmp.string());
    const char* kind = d.tail.kind == TailKind::Zero        ? "zero"
                       : d.tail.kind == TailKind::ExpPower ? "exp"
                                                            : "pow";
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "SPMB-D v1 h=%.17g rmax=%.17g tail=%s C=%.17g alpha=%.17g "
                  "power=%.17g\n",
                  d.h, d.r_max, kind, d.tail.C, d.tail.alpha, d.tail.power);
    out << buf;
    for (std::size_t i = 0; i < d.f.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g\n", d.r_at(i), d.f[i]);
      out << buf;
    }
    if (!out) throw Error("save_density: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

RadialDensity load_density(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_density: cannot open " + path.string());
  std::string header;
  if (!std::getline(in, header))
    throw CacheFormatError("load_density: empty file " + path.string());
  std::istringstream hs(header);
  std::string magic, version;
  hs >> magic >> version;
  if (magic != "SPMB-D" || version != "v1")
    throw CacheFormatError("load_density: unsupported header '" + header + "'");
  RadialDensity d;
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw CacheFormatError("load_density: malformed header field '" + tok +
                             "'");
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    if (key == "h")
      d.h = std::stod(val);
    else if (key == "rmax")
      d.r_max = std::stod(val);
    else if (key == "tail")
      d.tail.kind = val == "zero"  ? TailKind::Zero
                    : val == "exp" ? TailKind::ExpPower
                    : val == "pow" ? TailKind::InversePower
                                   : throw CacheFormatError(
                                         "load_density: unknown tail kind '" +
                                         val + "'");
    else if (key == "C")
      d.tail.C = std::stod(val);
    else if (key == "alpha")
      d.tail.alpha = std::stod(val);
    else if (key == "power")
      d.tail.power = std::stod(val);
    else
      throw CacheFormatError("load_density: unknown header key '" + key + "'");
  }
  double r, v;
  while (in >> r >> v) d.f.push_back(v);
  const std::size_t expected =
      static_cast<std::size_t>(std::llround(d.r_max / d.h)) + 1;
  if (d.h <= 0.0 || d.f.size() != expected)
    throw CacheFormatError("load_density: row count mismatch in " +
                           path.string());
  return d;
}

} // namespace spmb
