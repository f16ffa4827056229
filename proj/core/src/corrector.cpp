#include "spmb/corrector.hpp"

#include <algorithm>
#include <cmath>

#include "spmb/errors.hpp"
#include "spmb/numerics.hpp"

namespace spmb {

namespace {

// Centered cubic B-spline on [-2, 2].
double bspline(double t) {
  const double a = std::abs(t);
  if (a >= 2.0) return 0.0;
  if (a >= 1.0) {
    const double q = 2.0 - a;
    return q * q * q / 6.0;
  }
  return 2.0 / 3.0 - a * a + a * a * a / 2.0;
}

double dbspline(double t) {
  const double a = std::abs(t);
  if (a >= 2.0) return 0.0;
  const double s = t < 0.0 ? -1.0 : 1.0;
  if (a >= 1.0) {
    const double q = 2.0 - a;
    return -0.5 * q * q * s;
  }
  return (-2.0 * a + 1.5 * a * a) * s;
}

double spow(double s, double p) {
  return std::copysign(std::pow(std::abs(s), p), s);
}

// 4-point Lagrange weights on a uniform grid (clamped), shared across tables.
struct InterpW {
  std::size_t i0 = 0;
  double w[4] = {0, 0, 0, 0};
};

InterpW interp_weights(double h, std::size_t n, double x) {
  InterpW out;
  if (n < 4 || h <= 0.0) return out;
  double t = x / h;
  const double tmax = static_cast<double>(n - 1);
  if (t < 0.0) t = 0.0;
  if (t > tmax) t = tmax;
  std::size_t j = static_cast<std::size_t>(t);
  j = (j == 0) ? 0 : j - 1;
  if (j > n - 4) j = n - 4;
  const double u = t - static_cast<double>(j);
  out.i0 = j;
  out.w[0] = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
  out.w[1] = u * (u - 2.0) * (u - 3.0) / 2.0;
  out.w[2] = -u * (u - 1.0) * (u - 3.0) / 2.0;
  out.w[3] = u * (u - 1.0) * (u - 2.0) / 6.0;
  return out;
}

double interp_apply(const InterpW& w, const std::vector<double>& v) {
  return w.w[0] * v[w.i0] + w.w[1] * v[w.i0 + 1] + w.w[2] * v[w.i0 + 2] +
         w.w[3] * v[w.i0 + 3];
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& g,
                                         double h) {
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t i = 1; i < g.size(); ++i)
    out[i] = out[i - 1] + 0.5 * h * (g[i - 1] + g[i]);
  return out;
}

// Multipole potential of the axisymmetric source rho(s) P_l(cos gamma):
// Psi_l(s) = 4pi/(2l+1) [ s^{-(l+1)} \int_0^s rho t^{l+2} dt
//                         + s^l \int_s^inf rho t^{1-l} dt ].
RadialTable multipole_potential(const GroundStateProfile& prof,
                                const std::vector<double>& rho, int l) {
  const std::size_t n = prof.size();
  const double h = prof.h;
  std::vector<double> ga(n), gb(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = prof.r_at(i);
    ga[i] = rho[i] * std::pow(t, l + 2.0);
    gb[i] = (i == 0 && l >= 1) ? 0.0 : rho[i] * std::pow(t, 1.0 - l);
  }
  const auto A = cumulative_trapezoid(ga, h);
  const auto B = cumulative_trapezoid(gb, h);
  const double btot = B.back();
  const double pref = 4.0 * M_PI / (2.0 * l + 1.0);
  RadialTable out;
  out.h = h;
  out.v.resize(n);
  out.v[0] = (l == 0) ? pref * btot : 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double s = prof.r_at(i);
    out.v[i] = pref * (A[i] / std::pow(s, l + 1.0) +
                       std::pow(s, static_cast<double>(l)) * (btot - B[i]));
  }
  out.tail_coef = pref * A.back();
  out.tail_pow = l + 1;
  return out;
}

// Bump axes: e_j = P_j / r (x1-axis for the degenerate r = 0 case).
Point3 bump_axis(const BumpConfiguration& cfg, std::size_t j) {
  if (cfg.r <= 0.0) return Point3{1.0, 0.0, 0.0};
  const auto& p = cfg.positions[j];
  return Point3{p[0] / cfg.r, p[1] / cfg.r, p[2] / cfg.r};
}

// Everything the assembly and fixed-point passes need at one quadrature point.
struct PointWork {
  Eigen::VectorXd val;      // basis values
  Eigen::MatrixXd grad;     // 3 x N
  Eigen::VectorXd psi_val;  // Psi_n summed over bumps
  double z = 0.0;           // ansatz value
  double upsum = 0.0;       // sum U_j^p
  double phi_z = 0.0;       // sum of the radialized bump potentials
  double phi_w = 0.0;       // optional extra monopole table sum
};

struct PointEvaluator {
  const SymmetricBasis* basis = nullptr;
  const GroundStateProfile* prof = nullptr;
  const std::vector<RadialTable>* psi = nullptr;   // may be null
  const RadialTable* phi_bump = nullptr;           // may be null
  const RadialTable* phi_extra = nullptr;          // may be null
  bool need_grad = false;
  std::vector<Point3> axes;

  void init(const SymmetricBasis& b) {
    basis = &b;
    prof = b.profile.get();
    axes.clear();
    for (std::size_t j = 0; j < b.config.positions.size(); ++j)
      axes.push_back(bump_axis(b.config, j));
  }

  void operator()(const Point3& x, PointWork& w) const {
    const std::size_t nfn = basis->size();
    w.val.setZero(nfn);
    if (need_grad) w.grad.setZero(3, nfn);
    if (psi != nullptr) w.psi_val.setZero(nfn);
    w.z = 0.0;
    w.upsum = 0.0;
    w.phi_z = 0.0;
    w.phi_w = 0.0;
    const double p = prof->p;
    const double grid_end = prof->h * (prof->size() - 1);
    for (std::size_t j = 0; j < basis->config.positions.size(); ++j) {
      const auto& pj = basis->config.positions[j];
      const double dx = x[0] - pj[0], dy = x[1] - pj[1], dz = x[2] - pj[2];
      double s = std::sqrt(dx * dx + dy * dy + dz * dz);
      if (s < 1e-9) s = 1e-9;
      const double u = evaluate_with_tail(*prof, s);
      w.z += u;
      w.upsum += std::pow(u, p);
      if (phi_bump != nullptr) w.phi_z += (*phi_bump)(s);
      if (phi_extra != nullptr) w.phi_w += (*phi_extra)(s);
      const bool in_grid = s <= grid_end;
      if (!in_grid && psi == nullptr) continue;
      InterpW iw;
      if (in_grid) iw = interp_weights(prof->h, prof->size(), s);
      if (psi != nullptr) {
        for (std::size_t n = 0; n < nfn; ++n) {
          const auto& tab = (*psi)[n];
          if (in_grid)
            w.psi_val[n] += tab.w_apply(iw.i0, iw.w);
          else
            w.psi_val[n] += tab(s);
        }
      }
      if (!in_grid) continue;
      const double sx = dx / s, sy = dy / s, sz = dz / s;
      const auto& e = axes[j];
      const double c = sx * e[0] + sy * e[1] + sz * e[2];
      double pl[3], dpl[3];
      for (int l = 0; l < 3; ++l) {
        pl[l] = legendre_p(l, c);
        dpl[l] = legendre_dp(l, c);
      }
      for (std::size_t n = 0; n < nfn; ++n) {
        const auto& comp = basis->fns[n];
        const double fv = interp_apply(iw, comp.f);
        if (fv == 0.0 && !need_grad) continue;
        const int l = comp.l;
        w.val[n] += fv * pl[l];
        if (need_grad) {
          const double dv = interp_apply(iw, comp.df);
          const double t1 = dv * pl[l];
          const double t2 = fv * dpl[l] / s;
          // grad = t1 * shat + t2 * (e - c shat)
          w.grad(0, n) += t1 * sx + t2 * (e[0] - c * sx);
          w.grad(1, n) += t1 * sy + t2 * (e[1] - c * sy);
          w.grad(2, n) += t1 * sz + t2 * (e[2] - c * sz);
        }
      }
    }
  }
};

std::vector<double> sample_vbar(const GroundStateProfile& prof,
                                const PotentialModel& V, double rho) {
  std::vector<double> out(prof.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = radialized_potential(V, rho, prof.r_at(i));
  return out;
}

double probe_norm_sq(const GroundStateProfile& prof,
                     const std::function<double(double)>& g) {
  const double h = prof.h;
  const std::size_t n = prof.size();
  std::vector<double> gv(n), integ(n);
  for (std::size_t i = 0; i < n; ++i) gv[i] = g(prof.r_at(i));
  for (std::size_t i = 0; i < n; ++i) {
    double dg;
    if (i == 0)
      dg = (gv[1] - gv[0]) / h;
    else if (i + 1 == n)
      dg = (gv[n - 1] - gv[n - 2]) / h;
    else
      dg = (gv[i + 1] - gv[i - 1]) / (2.0 * h);
    const double s = prof.r_at(i);
    integ[i] = (dg * dg + gv[i] * gv[i]) * s * s;
  }
  return 4.0 * M_PI * simpson_uniform(integ, h);
}

RadialAngularField component_field(const BasisComponent& c) {
  return RadialAngularField{c.f, c.df, c.l};
}

}  // namespace

double RadialTable::operator()(double r) const {
  const double end = h * (v.size() - 1);
  if (r <= end) {
    const InterpW w = interp_weights(h, v.size(), r);
    return interp_apply(w, v);
  }
  const double inv = 1.0 / r;
  double t = tail_coef * inv;
  for (int i = 1; i < tail_pow; ++i) t *= inv;
  return t;
}

double RadialTable::w_apply(std::size_t i0, const double* w) const {
  return w[0] * v[i0] + w[1] * v[i0 + 1] + w[2] * v[i0 + 2] + w[3] * v[i0 + 3];
}

SymmetricBasis build_symmetric_basis(
    const BumpConfiguration& config,
    std::shared_ptr<const GroundStateProfile> profile, const BasisSpec& spec) {
  if (!profile) throw Error("build_symmetric_basis: null profile");
  if (spec.n_radial < 1 || spec.angular_orders.empty())
    throw Error("build_symmetric_basis: empty basis spec");
  SymmetricBasis basis;
  basis.config = config;
  basis.profile = profile;
  const std::size_t n = profile->size();
  const double h = profile->h;

  for (int l : spec.angular_orders) {
    if (l < 0 || l > 2)
      throw Error("build_symmetric_basis: angular orders limited to {0,1,2}");
    int n_left = spec.n_radial;
    if (l == 0) {
      BasisComponent c{0, "U", profile->u, profile->du};
      basis.fns.push_back(std::move(c));
      --n_left;
    } else if (l == 1) {
      const auto u1 = field_U1(*profile);
      BasisComponent c{1, "dU", u1.f, u1.df};
      basis.fns.push_back(std::move(c));
      --n_left;
    }
    // Cubic B-spline bumps, log-spaced (uniform in q = log(1+s)) so the
    // sharp profile head near the origin is resolved as well as the tail.
    // For l >= 1 a (s/(s+d))^l taper keeps the multipole source moments
    // integrable at the origin.
    const double qmax = std::log(1.0 + spec.support);
    const double delta = qmax / (n_left + 1);
    for (int i = 0; i < n_left; ++i) {
      const double center = (i + 1) * delta;
      const double s_center = std::expm1(center);
      BasisComponent c;
      c.l = l;
      c.name = "spl" + std::to_string(l) + "_" + std::to_string(i);
      c.f.resize(n);
      c.df.resize(n);
      for (std::size_t g = 0; g < n; ++g) {
        const double s = static_cast<double>(g) * h;
        const double t = (std::log1p(s) - center) / delta;
        double taper = 1.0, dtaper = 0.0;
        if (l >= 1) {
          const double q = s / (s + s_center);
          taper = std::pow(q, static_cast<double>(l));
          dtaper = l * std::pow(q, l - 1.0) * s_center /
                   ((s + s_center) * (s + s_center));
        }
        c.f[g] = bspline(t) * taper;
        c.df[g] = dbspline(t) / (delta * (1.0 + s)) * taper + bspline(t) * dtaper;
      }
      basis.fns.push_back(std::move(c));
    }
  }

  // Single-bump radial Gram conditioning (block diagonal across l).
  const std::size_t nfn = basis.size();
  Eigen::MatrixXd g1(nfn, nfn);
  for (std::size_t a = 0; a < nfn; ++a)
    for (std::size_t b = a; b < nfn; ++b) {
      g1(a, b) = energy_inner(*profile, component_field(basis.fns[a]),
                              component_field(basis.fns[b]));
      g1(b, a) = g1(a, b);
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g1);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0 || hi / lo > 1e10)
    throw DegenerateBasis("build_symmetric_basis: radial Gram condition " +
                          std::to_string(lo <= 0.0 ? -1.0 : hi / lo));
  return basis;
}

double evaluate_basis_function(const SymmetricBasis& basis, std::size_t n,
                               const Point3& x) {
  if (n >= basis.size())
    throw IndexOutOfRange("evaluate_basis_function: index out of range");
  PointEvaluator ev;
  ev.init(basis);
  PointWork w;
  ev(x, w);
  return w.val[n];
}

double projection_defect(const SymmetricBasis& basis,
                         const std::function<double(double)>& g, int l) {
  const auto& prof = *basis.profile;
  const std::size_t n = prof.size();
  RadialAngularField target;
  target.l = l;
  target.f.resize(n);
  target.df.resize(n);
  for (std::size_t i = 0; i < n; ++i) target.f[i] = g(prof.r_at(i));
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0)
      target.df[i] = (target.f[1] - target.f[0]) / prof.h;
    else if (i + 1 == n)
      target.df[i] = (target.f[n - 1] - target.f[n - 2]) / prof.h;
    else
      target.df[i] = (target.f[i + 1] - target.f[i - 1]) / (2.0 * prof.h);
  }
  std::vector<std::size_t> idx;
  for (std::size_t a = 0; a < basis.size(); ++a)
    if (basis.fns[a].l == l) idx.push_back(a);
  if (idx.empty()) throw Error("projection_defect: no components of order l");
  const std::size_t m = idx.size();
  Eigen::MatrixXd gm(m, m);
  Eigen::VectorXd q(m);
  for (std::size_t a = 0; a < m; ++a) {
    const auto fa = component_field(basis.fns[idx[a]]);
    q(a) = energy_inner(prof, fa, target);
    for (std::size_t b = a; b < m; ++b) {
      gm(a, b) = energy_inner(prof, fa, component_field(basis.fns[idx[b]]));
      gm(b, a) = gm(a, b);
    }
  }
  const double t2 = energy_inner(prof, target, target);
  const double fit = q.dot(gm.ldlt().solve(q));
  return std::sqrt(std::max(0.0, t2 - fit) / t2);
}

ProjectedSystem assemble_projected_system(const SymmetricBasis& basis,
                                          const MultiBumpAnsatz& ansatz,
                                          const QuadratureSpec& quad,
                                          QuadratureBudget& budget,
                                          bool include_nonlocal) {
  ProjectedSystem sys;
  sys.basis = basis;
  sys.ansatz = ansatz;
  sys.quad = quad;
  sys.include_nonlocal = include_nonlocal;
  const auto& prof = *basis.profile;
  const double p = prof.p;
  const std::size_t nfn = basis.size();
  const int k = basis.config.k;

  sys.vbar = sample_vbar(prof, ansatz.potential, basis.config.r);
  {
    std::vector<double> rho(prof.size());
    for (std::size_t i = 0; i < rho.size(); ++i)
      rho[i] = sys.vbar[i] * prof.u[i] * prof.u[i];
    sys.phi_bump = multipole_potential(prof, rho, 0);
  }
  sys.psi.clear();
  for (std::size_t n = 0; n < nfn; ++n) {
    std::vector<double> rho(prof.size());
    for (std::size_t i = 0; i < rho.size(); ++i)
      rho[i] = sys.vbar[i] * prof.u[i] * basis.fns[n].f[i];
    sys.psi.push_back(multipole_potential(prof, rho, basis.fns[n].l));
  }

  PointEvaluator ev;
  ev.init(basis);
  ev.psi = &sys.psi;
  ev.phi_bump = &sys.phi_bump;
  ev.need_grad = true;
  PointWork pw;

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(nfn, nfn);
  Eigen::MatrixXd local = Eigen::MatrixXd::Zero(nfn, nfn);
  Eigen::MatrixXd hat = Eigen::MatrixXd::Zero(nfn, nfn);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(nfn);

  sector_for_each(
      basis.config, quad,
      [&](const Point3& x, double w) {
        ev(x, pw);
        const double vx =
            ansatz.potential(std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
        const double zp1 = std::pow(pw.z, p - 1.0);
        const double coef_local =
            (include_nonlocal ? vx * pw.phi_z : 0.0) - p * zp1;
        for (std::size_t a = 0; a < nfn; ++a) {
          for (std::size_t b = a; b < nfn; ++b) {
            const double vv = pw.val[a] * pw.val[b];
            gram(a, b) += w * (pw.grad.col(a).dot(pw.grad.col(b)) + vv);
            local(a, b) += w * coef_local * vv;
          }
          load(a) += w * (vx * pw.phi_z * pw.z - (zp1 * pw.z - pw.upsum)) *
                     pw.val[a];
          if (include_nonlocal) {
            const double q = w * vx * pw.z * pw.val[a];
            for (std::size_t b = 0; b < nfn; ++b)
              hat(a, b) += q * pw.psi_val[b];
          }
        }
      },
      budget);

  gram *= k;
  local *= k;
  hat *= k;
  load *= k;
  for (std::size_t a = 0; a < nfn; ++a)
    for (std::size_t b = 0; b < a; ++b) {
      gram(a, b) = gram(b, a);
      local(a, b) = local(b, a);
    }
  sys.gram = gram;
  sys.lin = gram + local;
  if (include_nonlocal)
    sys.lin += hat + hat.transpose();  // the 2 V phi-hat z u term, symmetrized
  sys.load = load;

  // W-constraint rows int U_{P_1}^{p-1} Z_{1,j} B_n over a bump-centered ball.
  sys.constraints = Eigen::MatrixXd::Zero(3, nfn);
  {
    PointEvaluator cev;
    cev.init(basis);
    PointWork cw;
    const auto& gl_s = gauss_legendre(6);
    const auto& gl_u = gauss_legendre(16);
    const int n_phi = 16, n_s_panels = 12;
    const double s_hi = 12.0;
    const double ws = s_hi / n_s_panels;
    budget.charge(static_cast<std::uint64_t>(n_s_panels) * 6 * 16 * n_phi);
    const auto& p1 = basis.config.positions[0];
    const auto e1 = bump_axis(basis.config, 0);
    // In-plane and vertical directions completing the bump frame.
    const Point3 e2{-e1[1], e1[0], 0.0};
    const Point3 e3{0.0, 0.0, 1.0};
    for (int is = 0; is < n_s_panels; ++is)
      for (int js = 0; js < 6; ++js) {
        const double s = ws * (is + 0.5 + 0.5 * gl_s.nodes[js]);
        const double w_s = 0.5 * ws * gl_s.weights[js] * s * s;
        const double uval = evaluate_with_tail(prof, s);
        const double duval = evaluate_du_with_tail(prof, s);
        const double head = std::pow(uval, p - 1.0) * duval;
        for (int ju = 0; ju < 16; ++ju) {
          const double c = gl_u.nodes[ju];
          const double w_u = gl_u.weights[ju];
          const double sg = std::sqrt(std::max(0.0, 1.0 - c * c));
          for (int jp = 0; jp < n_phi; ++jp) {
            const double phi = 2.0 * M_PI * jp / n_phi;
            const double w_phi = 2.0 * M_PI / n_phi;
            const double ca = std::cos(phi), sa = std::sin(phi);
            Point3 x;
            for (int d = 0; d < 3; ++d)
              x[d] = p1[d] + s * (c * e1[d] + sg * (ca * e2[d] + sa * e3[d]));
            cev(x, cw);
            const double w_all = w_s * w_u * w_phi * head;
            for (std::size_t n = 0; n < nfn; ++n) {
              sys.constraints(0, n) += w_all * c * cw.val[n];
              sys.constraints(1, n) += w_all * sg * ca * cw.val[n];
              sys.constraints(2, n) += w_all * sg * sa * cw.val[n];
            }
          }
        }
      }
  }
  sys.constraint_defect_23 =
      std::max(sys.constraints.row(1).cwiseAbs().maxCoeff(),
               sys.constraints.row(2).cwiseAbs().maxCoeff());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.gram);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0 || hi / lo > 1e10)
    throw DegenerateBasis("assemble_projected_system: Gram condition " +
                          std::to_string(lo <= 0.0 ? -1.0 : hi / lo));
  sys.gram_condition = hi / lo;
  return sys;
}

SpectralReport spectral_split_check(const ProjectedSystem& sys) {
  SpectralReport rep;
  const std::size_t nfn = sys.basis.size();
  const Eigen::RowVectorXd c = sys.constraints.row(0);
  Eigen::MatrixXd kernel;
  if (c.norm() < 1e-12) {
    kernel = Eigen::MatrixXd::Identity(nfn, nfn);
  } else {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(c);
    kernel = lu.kernel();
  }
  const Eigen::MatrixXd aw = kernel.transpose() * sys.lin * kernel;
  const Eigen::MatrixXd gw = kernel.transpose() * sys.gram * kernel;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(aw, gw);
  for (int i = 0; i < ges.eigenvalues().size(); ++i)
    rep.eigenvalues.push_back(ges.eigenvalues()[i]);
  double min_abs = 1e300;
  for (double e : rep.eigenvalues) min_abs = std::min(min_abs, std::abs(e));
  rep.cbar_hat = min_abs > 0.0 ? 1.0 / min_abs : 0.0;

  // Projected symmetrized bump direction.
  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(nfn);
  bool found = false;
  for (std::size_t n = 0; n < nfn; ++n)
    if (sys.basis.fns[n].name == "U") {
      v0(n) = 1.0;
      found = true;
      break;
    }
  if (found) {
    if (c.norm() > 1e-12)
      v0 -= c.transpose() * (c * v0) / c.squaredNorm();
    const double num = v0.dot(sys.lin * v0);
    const double den = v0.dot(sys.gram * v0);
    rep.bump_rayleigh = num / den;
  } else {
    rep.bump_rayleigh = rep.eigenvalues.empty() ? 0.0 : rep.eigenvalues.front();
  }
  rep.c1_hat = rep.bump_rayleigh < 0.0 ? -rep.bump_rayleigh : 0.0;

  // Complement of the bump direction inside W, G-orthogonalized.
  if (kernel.cols() >= 2 && found) {
    const double v0g = v0.dot(sys.gram * v0);
    Eigen::MatrixXd comp(nfn, kernel.cols());
    for (int i = 0; i < kernel.cols(); ++i) {
      Eigen::VectorXd col = kernel.col(i);
      col -= v0 * (v0.dot(sys.gram * col) / v0g);
      comp.col(i) = col;
    }
    // Drop the near-null direction produced by the deflation.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(comp, Eigen::ComputeThinU);
    const int keep = static_cast<int>(kernel.cols()) - 1;
    const Eigen::MatrixXd base = svd.matrixU().leftCols(keep);
    const Eigen::MatrixXd ac = base.transpose() * sys.lin * base;
    const Eigen::MatrixXd gc = base.transpose() * sys.gram * base;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ces(ac, gc);
    rep.c2_hat = ces.eigenvalues().minCoeff();
    rep.split_ok = rep.bump_rayleigh < 0.0 && rep.c2_hat > 0.0;
  } else {
    rep.c2_hat = 0.0;
    rep.split_ok = rep.bump_rayleigh < 0.0;
  }
  return rep;
}

Eigen::VectorXd remainder_gradient(const ProjectedSystem& sys,
                                   const Eigen::VectorXd& w,
                                   QuadratureBudget& budget) {
  const auto& basis = sys.basis;
  const auto& prof = *basis.profile;
  const double p = prof.p;
  const std::size_t nfn = basis.size();
  const int k = basis.config.k;
  if (w.size() != static_cast<Eigen::Index>(nfn))
    throw Error("remainder_gradient: coefficient size mismatch");

  // Monopole of V w^2 about the bump center: <w^2>(s) = sum_l w_l^2/(2l+1).
  RadialTable phi_w;
  {
    std::vector<double> wl[3];
    for (int l = 0; l < 3; ++l) wl[l].assign(prof.size(), 0.0);
    for (std::size_t n = 0; n < nfn; ++n) {
      const auto& comp = basis.fns[n];
      for (std::size_t i = 0; i < prof.size(); ++i)
        wl[comp.l][i] += w[n] * comp.f[i];
    }
    std::vector<double> rho(prof.size());
    for (std::size_t i = 0; i < prof.size(); ++i) {
      double avg = 0.0;
      for (int l = 0; l < 3; ++l) avg += wl[l][i] * wl[l][i] / (2.0 * l + 1.0);
      rho[i] = sys.vbar[i] * avg;
    }
    phi_w = multipole_potential(prof, rho, 0);
  }

  PointEvaluator ev;
  ev.init(basis);
  ev.psi = &sys.psi;
  ev.phi_bump = &sys.phi_bump;
  ev.phi_extra = &phi_w;
  PointWork pw;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(nfn);

  sector_for_each(
      basis.config, sys.quad,
      [&](const Point3& x, double wt) {
        ev(x, pw);
        const double vx = sys.ansatz.potential(
            std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
        const double wx = w.dot(pw.val);
        const double phi_zw = w.dot(pw.psi_val);
        const double s = pw.z + wx;
        double res = vx * (2.0 * phi_zw * wx + pw.phi_w * s);
        res -= spow(s, p) - std::pow(pw.z, p) -
               p * std::pow(pw.z, p - 1.0) * wx;
        if (!sys.include_nonlocal)
          res += vx * (pw.phi_z * wx + 2.0 * phi_zw * pw.z);
        out += (wt * res) * pw.val;
      },
      budget);
  return k * out;
}

FixedPointResult solve_fixed_point(const ProjectedSystem& sys,
                                   QuadratureBudget& budget, double tol,
                                   int max_iter) {
  const std::size_t nfn = sys.basis.size();
  const Eigen::RowVectorXd c = sys.constraints.row(0);
  const bool constrained = c.norm() > 1e-12;
  const std::size_t dim = nfn + (constrained ? 1 : 0);
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
  kkt.topLeftCorner(nfn, nfn) = sys.lin;
  if (constrained) {
    kkt.topRightCorner(nfn, 1) = c.transpose();
    kkt.bottomLeftCorner(1, nfn) = c;
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);

  FixedPointResult res;
  res.w = Eigen::VectorXd::Zero(nfn);
  Eigen::VectorXd w = res.w;
  double prev_step = -1.0;
  int bad_streak = 0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    const Eigen::VectorXd rp =
        it == 0 ? Eigen::VectorXd::Zero(nfn).eval()
                : remainder_gradient(sys, w, budget);
    rhs.head(nfn) = -(sys.load + rp);
    const Eigen::VectorXd sol = lu.solve(rhs);
    Eigen::VectorXd w_next = sol.head(nfn);
    if (constrained) res.multiplier = sol(nfn);
    if (res.damped) w_next = w + 0.5 * (w_next - w);
    const Eigen::VectorXd dw = w_next - w;
    const double step = std::sqrt(dw.dot(sys.gram * dw));
    res.step_norms.push_back(step);
    if (prev_step > 0.0) {
      const double ratio = step / prev_step;
      res.ratios.push_back(ratio);
      if (ratio > 1.0) {
        if (++bad_streak >= 3) {
          if (!res.damped) {
            res.damped = true;  // engage relaxation 0.5 and keep going
            bad_streak = 0;
          } else {
            throw NotContracting(
                "solve_fixed_point: step ratio > 1 for 3 iterations");
          }
        }
      } else {
        bad_streak = 0;
      }
    }
    w = w_next;
    prev_step = step;
    res.iterations = it + 1;
    if (step < tol) {
      res.converged = true;
      break;
    }
  }
  res.w = w;
  res.w_norm = std::sqrt(w.dot(sys.gram * w));
  return res;
}

double evaluate_correction(const ProjectedSystem& sys, const Eigen::VectorXd& w,
                           const Point3& x) {
  PointEvaluator ev;
  ev.init(sys.basis);
  PointWork pw;
  ev(x, pw);
  return w.dot(pw.val);
}

double corrected_residual_surrogate(const ProjectedSystem& sys,
                                    const Eigen::VectorXd& w,
                                    const std::vector<RadialProbe>& probes,
                                    QuadratureBudget& budget) {
  if (probes.empty())
    throw Error("corrected_residual_surrogate: no probes");
  const auto& basis = sys.basis;
  const auto& prof = *basis.profile;
  const double p = prof.p;
  const int k = basis.config.k;
  const std::size_t nfn = basis.size();
  const bool with_w = w.squaredNorm() > 0.0;

  RadialTable phi_w;
  if (with_w) {
    std::vector<double> wl[3];
    for (int l = 0; l < 3; ++l) wl[l].assign(prof.size(), 0.0);
    for (std::size_t n = 0; n < nfn; ++n)
      for (std::size_t i = 0; i < prof.size(); ++i)
        wl[basis.fns[n].l][i] += w[n] * basis.fns[n].f[i];
    std::vector<double> rho(prof.size());
    for (std::size_t i = 0; i < prof.size(); ++i) {
      double avg = 0.0;
      for (int l = 0; l < 3; ++l) avg += wl[l][i] * wl[l][i] / (2.0 * l + 1.0);
      rho[i] = sys.vbar[i] * avg;
    }
    phi_w = multipole_potential(prof, rho, 0);
  }

  PointEvaluator ev;
  ev.init(basis);
  ev.psi = with_w ? &sys.psi : nullptr;
  ev.phi_bump = &sys.phi_bump;
  ev.phi_extra = with_w ? &phi_w : nullptr;
  ev.need_grad = with_w;
  PointWork pw;

  double worst = 0.0;
  const double dg_h = 1e-5;
  for (const auto& probe : probes) {
    const double vnorm = std::sqrt(k * probe_norm_sq(prof, probe.g));
    double acc = 0.0;
    sector_for_each(
        basis.config, sys.quad,
        [&](const Point3& x, double wt) {
          ev(x, pw);
          const double vx = sys.ansatz.potential(
              std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
          double wx = 0.0, phi_zw = 0.0;
          double gw[3] = {0, 0, 0};
          if (with_w) {
            wx = w.dot(pw.val);
            phi_zw = w.dot(pw.psi_val);
            const Eigen::Vector3d gv = pw.grad * w;
            gw[0] = gv[0];
            gw[1] = gv[1];
            gw[2] = gv[2];
          }
          // Probe value and gradient over all bumps.
          double v = 0.0, gvp[3] = {0, 0, 0};
          for (const auto& pj : basis.config.positions) {
            const double dx = x[0] - pj[0], dy = x[1] - pj[1],
                         dz = x[2] - pj[2];
            double s = std::sqrt(dx * dx + dy * dy + dz * dz);
            if (s < 1e-9) s = 1e-9;
            v += probe.g(s);
            if (with_w) {
              const double dgs =
                  (probe.g(s + dg_h) - probe.g(std::max(0.0, s - dg_h))) /
                  (2.0 * dg_h);
              gvp[0] += dgs * dx / s;
              gvp[1] += dgs * dy / s;
              gvp[2] += dgs * dz / s;
            }
          }
          const double zw = pw.z + wx;
          const double phi_total = pw.phi_z + 2.0 * phi_zw + pw.phi_w;
          double integ = (vx * phi_total * zw - (spow(zw, p) - pw.upsum)) * v;
          if (with_w)
            integ += gw[0] * gvp[0] + gw[1] * gvp[1] + gw[2] * gvp[2] +
                     wx * v;
          acc += wt * integ;
        },
        budget);
    worst = std::max(worst, std::abs(k * acc) / vnorm);
  }
  return worst;
}

} // namespace spmb
