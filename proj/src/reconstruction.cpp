#include "hvscat/reconstruction.hpp"

#include <chrono>
#include <cmath>

#include <boost/math/tools/minima.hpp>

#include "hvscat/quadrature.hpp"

namespace hvs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const cplx I(0, 1);

Vec2 centre_of(const PairPotential& V) {
  Vec2 c = Vec2::Zero();
  if (V.empty()) return c;
  for (const auto& t : V.terms()) c += t.center;
  return c / double(V.terms().size());
}

/*!
 * int F(tau) dtau over the real line: geometric pieces about tau_c out to
 * 64 ell, algebraic tails beyond with decay exponent beta.
 */
template <class F>
cplx line_quad(F&& f, double tau_c, double ell, double beta, double tol, const char* what) {
  QuadOptions o;
  o.abs_tol = tol / 3;
  o.what = what;
  if (!std::isfinite(beta)) {
    // every term is negligible once the line is ell away from the packet
    std::vector<double> pts;
    for (int k = -8; k <= 8; ++k) pts.push_back(tau_c + k * ell / 8);
    return integrate_pieces(f, pts, o).value;
  }
  std::vector<double> pts;
  std::vector<double> pos;
  const double reach = 64 * ell;
  for (double s = ell / 4; s < reach; s *= 2) pos.push_back(s);
  pts.push_back(tau_c - reach);
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) pts.push_back(tau_c - *it);
  pts.push_back(tau_c);
  for (double s : pos) pts.push_back(tau_c + s);
  pts.push_back(tau_c + reach);
  cplx v = integrate_pieces(f, pts, o).value;
  const double b = beta;
  if (!(b > 1)) throw DomainError(std::string(what) + ": integrand is not integrable along the line");
  v += integrate_to_infinity([&](double s) { return f(s); }, tau_c + reach, b, reach, o).value;
  v += integrate_to_infinity([&](double s) { return f(-s); }, -(tau_c - reach), b, reach, o).value;
  return v;
}

struct LineGeometry {
  double tau_c, ell;
};

LineGeometry geometry(const DensityPoints& d, const Vec2& y, const Vec2& vhat, const PairPotential& V) {
  const Vec2 c = centre_of(V);
  LineGeometry g;
  g.tau_c = (c - d.centre - y).dot(vhat);
  g.ell = std::max(0.5, potential_extent(V) + d.radius);
  return g;
}

double unit_check(const Vec2& vhat) {
  const double n = vhat.norm();
  if (std::abs(n - 1) > 1e-12) throw DomainError("xray: vhat must be a unit vector");
  return n;
}

}  // namespace

DensityPoints density_points(const Field2D& a, const Field2D& b, double rel_cut) {
  if (a.grid != b.grid) throw ShapeError("density_points: grid mismatch");
  const Grid2D& g = a.grid;
  const CArray w = a.data * b.data.conjugate() * g.cell();
  const double peak = w.abs().maxCoeff();
  DensityPoints d;
  if (peak == 0) return d;
  double sw = 0;
  Vec2 c = Vec2::Zero();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (std::abs(w(j, i)) > rel_cut * peak) {
        d.x.emplace_back(g.x(i), g.y(j));
        d.w.push_back(w(j, i));
        c += std::abs(w(j, i)) * d.x.back();
        sw += std::abs(w(j, i));
      }
  d.centre = c / sw;
  for (const auto& x : d.x) d.radius = std::max(d.radius, (x - d.centre).norm());
  return d;
}

cplx xray_potential(const Field2D& Phi, const Field2D& Psi, const Vec2& y, const Vec2& vhat, const PairPotential& V,
                    double tol) {
  unit_check(vhat);
  if (V.empty()) return 0.0;
  const DensityPoints d = density_points(Phi, Psi);
  if (d.x.empty()) return 0.0;
  const LineGeometry lg = geometry(d, y, vhat, V);
  auto f = [&](double tau) {
    const Vec2 s = y + tau * vhat;
    cplx acc = 0;
    for (std::size_t k = 0; k < d.x.size(); ++k) acc += V.value(d.x[k] + s) * d.w[k];
    return acc;
  };
  return line_quad(f, lg.tau_c, lg.ell, V.slowest_decay(), tol, "xray_potential");
}

cplx xray_rhs(const Field2D& Phi, const Field2D& Psi, const Vec2& y, const Vec2& vhat, int l, const PotentialSplit& V,
              const XRayOptions& opt) {
  unit_check(vhat);
  if (l != 1 && l != 2) throw DomainError("xray_rhs: l must be 1 or 2");
  const PairPotential tot = V.total();
  if (tot.empty()) return 0.0;
  const DensityPoints d = density_points(Phi, Psi);
  if (d.x.empty()) return 0.0;
  const LineGeometry lg = geometry(d, y, vhat, tot);
  const int a = l - 1;

  if (opt.form == XRayForm::derivative) {
    auto f = [&](double tau) {
      const Vec2 s = y + tau * vhat;
      cplx acc = 0;
      for (std::size_t k = 0; k < d.x.size(); ++k) acc += tot.gradient(d.x[k] + s)(a) * d.w[k];
      return I * acc;
    };
    return line_quad(f, lg.tau_c, lg.ell, tot.slowest_decay() + 1, opt.tol, "xray_rhs");
  }

  // commuted form: (V^vs p_l Phi, Psi) - (V^vs Phi, p_l Psi) + i((d_l (V^s + V^l)) Phi, Psi)
  const DensityPoints dp = density_points(momentum_op(Phi, l), Psi);
  const DensityPoints dq = density_points(Phi, momentum_op(Psi, l));
  const PairPotential sl = V.s + V.l;
  auto f = [&](double tau) {
    const Vec2 s = y + tau * vhat;
    cplx acc = 0;
    if (!V.vs.empty()) {
      for (std::size_t k = 0; k < dp.x.size(); ++k) acc += V.vs.value(dp.x[k] + s) * dp.w[k];
      for (std::size_t k = 0; k < dq.x.size(); ++k) acc -= V.vs.value(dq.x[k] + s) * dq.w[k];
    }
    if (!sl.empty()) {
      cplx g = 0;
      for (std::size_t k = 0; k < d.x.size(); ++k) g += sl.gradient(d.x[k] + s)(a) * d.w[k];
      acc += I * g;
    }
    return acc;
  };
  const double beta = std::min(V.vs.slowest_decay(), sl.slowest_decay() + 1);
  return line_quad(f, lg.tau_c, lg.ell, beta, opt.tol, "xray_rhs");
}

// ---- scans ---------------------------------------------------------------

namespace {

struct RealFit {
  double limit = 0, coeff = 0, rho = 0, ssr = 0;
};

/// y = L + c v^-rho for one real component: rho by Brent, (L, c) by least squares.
RealFit fit_component(const std::vector<double>& v, const Eigen::VectorXd& y, double rho_min, double rho_max) {
  const std::size_t n = v.size();
  RealFit f;
  auto solve = [&](double rho, Eigen::Vector2d& c) {
    Eigen::MatrixXd A(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
      A(i, 0) = 1;
      A(i, 1) = std::pow(v[i], -rho);
    }
    c = (A.transpose() * A).ldlt().solve(A.transpose() * y);
    return (y - A * c).squaredNorm();
  };
  Eigen::Vector2d c;
  if (y.cwiseAbs().maxCoeff() == 0) return f;
  const auto best = boost::math::tools::brent_find_minima([&](double r) { return solve(r, c); }, rho_min, rho_max, 40);
  f.rho = best.first;
  f.ssr = solve(f.rho, c);
  f.limit = c(0);
  f.coeff = c(1);
  return f;
}

}  // namespace

LimitFit fit_limit(const std::vector<double>& v, const std::vector<cplx>& values, double rho_min, double rho_max) {
  if (v.size() != values.size()) throw ShapeError("fit_limit: size mismatch");
  const std::size_t n = v.size();
  LimitFit f;
  if (n < 3) {
    f.flag = "fewer than 3 points";
    if (n) f.limit = values.back();
    return f;
  }
  Eigen::VectorXd re(n), im(n);
  for (std::size_t i = 0; i < n; ++i) {
    re(i) = values[i].real();
    im(i) = values[i].imag();
  }
  // real and imaginary parts may approach their limits at different powers
  const RealFit a = fit_component(v, re, rho_min, rho_max), b = fit_component(v, im, rho_min, rho_max);
  f.limit = cplx(a.limit, b.limit);
  f.coeff = cplx(a.coeff, b.coeff);
  f.rho_re = a.rho;
  f.rho_im = b.rho;
  // the slower-approaching component dominates the error at large v
  const double dr = std::abs(a.coeff) * std::pow(v.back(), -a.rho), di = std::abs(b.coeff) * std::pow(v.back(), -b.rho);
  f.rho = dr >= di ? a.rho : b.rho;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx model(a.limit + a.coeff * std::pow(v[i], -a.rho), b.limit + b.coeff * std::pow(v[i], -b.rho));
    f.residual = std::max(f.residual, std::abs(values[i] - model));
  }
  f.ok = std::isfinite(std::abs(f.limit));
  if (!f.ok) f.flag = "fit failed";
  return f;
}

double return_distance(const Vec2& v, const StarkParams& sp) {
  const double a = sp.half_accel();
  if (a == 0 || v(0) == 0) return kInf;
  return std::abs(v(0) * v(1) / a);
}

ScanPoint vs_element(const Field2D& Phi0, const Field2D& Psi0, double speed, const Vec2& vhat, const Vec2& y,
                     const Scene& scene, const EvolutionPlan& plan, const SandwichOptions& sw, double corr_tol) {
  ScanPoint p;
  p.v = speed;
  const Vec2 v = speed * vhat;
  if (scene.V.total().empty()) {
    p.converged = true;
    return p;
  }
  const ScatterRun run = apply_sandwich({Phi0}, scene, v, y, plan, sw);
  p.graf = graf_phase(v, scene.sp, scene.V.s);
  p.raw = speed * I * (inner(run.out[0], Psi0) - p.graf * inner(Phi0, Psi0));
  p.correction = sd_correction_element(Phi0, Psi0, speed, vhat, y, scene, corr_tol).value;
  p.value = p.raw - p.graf * p.correction;
  p.converged = run.converged;
  p.cauchy = run.cauchy_diff();
  p.note = run.stop_reason;
  p.T = run.T;
  p.boundary_mass = run.boundary_mass;
  p.wall_seconds = run.wall_seconds;
  p.steps = run.steps;
  return p;
}

ScanResult hv_scan(const Field2D& Phi0, const Field2D& Psi0, const Vec2& y, const Vec2& vhat, const Scene& scene,
                   const ScanOptions& opt) {
  if (std::abs(vhat.norm() - 1) > 1e-12) throw DomainError("hv_scan: vhat must be a unit vector");
  for (std::size_t i = 1; i < opt.v_list.size(); ++i)
    if (!(opt.v_list[i] > opt.v_list[i - 1])) throw DomainError("hv_scan: v_list must increase");
  if (scene.sp.q != 0 && std::abs(std::abs(vhat(0)) - 1) < 1e-15)
    throw DomainError("hv_scan: direction parallel to the field");

  ScanResult r;
  const double reach = potential_extent(scene.V.total()) + opt.sandwich.packet_radius + y.norm();
  std::vector<double> vs;
  std::vector<cplx> vals;
  for (double speed : opt.v_list) {
    ScanPoint p;
    p.v = speed;
    if (return_distance(speed * vhat, scene.sp) < reach) {
      p.skipped = true;
      p.note = "trajectory returns within " + fmt_g(reach);
      r.points.push_back(p);
      continue;
    }
    EvolutionPlan plan = opt.plan;
    plan.dt = opt.dt_scale / speed;
    if (opt.quantity == ScanQuantity::commutator) {
      const CommutatorResult c = commutator_element(Phi0, Psi0, speed, vhat, y, opt.l, scene, plan, opt.sandwich);
      p.raw = c.value;
      if (opt.divide_graf) p.graf = graf_phase(speed * vhat, scene.sp, scene.V.s);
      p.value = p.raw / p.graf;
      p.converged = c.run.converged;
      p.cauchy = c.run.cauchy_diff();
      p.note = c.run.stop_reason;
      p.T = c.run.T;
      p.boundary_mass = c.run.boundary_mass;
      p.wall_seconds = c.run.wall_seconds;
      p.steps = c.run.steps;
    } else {
      const double s = speed;
      p = vs_element(Phi0, Psi0, s, vhat, y, scene, plan, opt.sandwich, opt.correction_tol);
      if (opt.divide_graf) p.value /= p.graf;
    }
    if (!p.converged) r.flags.push_back("sandwich not converged at v = " + fmt_g(speed));
    vs.push_back(speed);
    vals.push_back(p.value);
    r.points.push_back(p);
  }

  if (vals.empty()) {
    r.flags.push_back("no usable speeds");
    return r;
  }
  double peak = 0;
  for (const auto& x : vals) peak = std::max(peak, std::abs(x));
  // roundoff level of v (a, b) differences; scans entirely below it are zero
  const double noise = 1e-11 * vs.back() * norm(Phi0) * norm(Psi0);
  if (peak <= noise) {
    r.fit.ok = true;
    r.limit = 0.0;
    r.residual = peak;
    return r;
  }
  const std::size_t n = vals.size();
  if (int(n) < opt.min_fit_points) {
    r.flags.push_back("only " + std::to_string(n) + " usable speeds");
    r.limit = vals.back();
    return r;
  }
  r.fit = fit_limit(vs, vals, opt.rho_min, opt.rho_max);
  r.rho = r.fit.rho;
  r.residual = r.fit.residual;
  r.limit = r.fit.limit;
  if (!r.fit.ok) {
    r.flags.push_back(r.fit.flag);
    r.limit = vals.back();
    return r;
  }
  const double floor = std::max(2 * opt.sandwich.tol * peak, noise);
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (std::abs(vals[i + 1] - r.limit) > std::abs(vals[i] - r.limit) + floor) {
      r.flags.push_back("non-monotone residuals");
      r.limit = vals.back();
      break;
    }
  return r;
}

// ---- recovery ---------------------------------------------------------------

cplx interpolate(const CArray& f, const Grid2D& g, const Vec2& x) {
  const double u = (x(0) - g.x(0)) / g.dx(), w = (x(1) - g.y(0)) / g.dy();
  const double fu = std::floor(u), fw = std::floor(w);
  const int i = int(fu), j = int(fw);
  const double a = u - fu, b = w - fw;
  auto at = [&](int jj, int ii) -> cplx {
    if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny) return 0.0;
    return f(jj, ii);
  };
  return (1 - b) * ((1 - a) * at(j, i) + a * at(j, i + 1)) + b * ((1 - a) * at(j + 1, i) + a * at(j + 1, i + 1));
}

namespace {

/// int_0^inf f(x0 + t e1) dt by the trapezoid rule at the image spacing, to the image edge.
cplx half_line(const CArray& f, const Grid2D& g, const Vec2& x0, double* edge) {
  const double h = g.dx();
  const double end = g.x(g.nx - 1) - x0(0);
  cplx s = 0;
  if (end <= 0) {
    if (edge) *edge = 0;
    return s;
  }
  const int n = int(std::floor(end / h));
  for (int k = 0; k <= n; ++k) s += (k == 0 || k == n ? 0.5 : 1.0) * interpolate(f, g, x0 + Vec2(k * h, 0)) * h;
  const double rest = end - n * h;
  if (rest > 0) s += 0.5 * (interpolate(f, g, x0 + Vec2(n * h, 0)) + interpolate(f, g, x0 + Vec2(end, 0))) * rest;
  if (edge) *edge = std::abs(interpolate(f, g, x0 + Vec2(end, 0)));
  return s;
}

}  // namespace

LineIntegral recover_line_integral(const CArray& f, const Grid2D& g) {
  if (f.rows() != g.ny || f.cols() != g.nx) throw ShapeError("recover_line_integral: image shape");
  LineIntegral r;
  double edge = 0;
  r.value = I * half_line(f, g, Vec2::Zero(), &edge);
  const double peak = f.abs().maxCoeff();
  r.edge_ratio = peak > 0 ? edge / peak : 0.0;
  if (r.edge_ratio > 1e-6)
    r.warnings.push_back("truncation: |f| at the image edge is " + fmt_g(r.edge_ratio) + " of the peak; tail estimate " +
                         fmt_g(edge * g.dx()));
  return r;
}

PointwiseEstimate pointwise_potential(const CArray& f, const Grid2D& g, const std::vector<Vec2>& centres, cplx overlap,
                                      double smear_width) {
  if (f.rows() != g.ny || f.cols() != g.nx) throw ShapeError("pointwise_potential: image shape");
  PointwiseEstimate e;
  e.centres = centres;
  e.smear_width = smear_width;
  const bool skip = std::abs(overlap) < 1e-8;
  for (const auto& x0 : centres) {
    e.skipped.push_back(skip);
    e.value.push_back(skip ? cplx(0) : I * half_line(f, g, x0, nullptr) / overlap);
  }
  return e;
}

PointwiseEstimate pointwise_from_h(const CArray& h, const Grid2D& g, const std::vector<Vec2>& centres, cplx overlap,
                                   double smear_width) {
  if (h.rows() != g.ny || h.cols() != g.nx) throw ShapeError("pointwise_from_h: image shape");
  PointwiseEstimate e;
  e.centres = centres;
  e.smear_width = smear_width;
  const bool skip = std::abs(overlap) < 1e-8;
  for (const auto& x0 : centres) {
    e.skipped.push_back(skip);
    e.value.push_back(skip ? cplx(0) : interpolate(h, g, x0) / overlap);
  }
  return e;
}

// ---- pipelines ------------------------------------------------------------

namespace {

double packet_reach(const Field2D& phi, const Field2D& psi, double given) {
  if (given > 0) return given;
  const DensityPoints d = density_points(phi, psi, 1e-12);
  return d.radius + d.centre.norm();
}

double smear(const Field2D& phi) {
  const Vec2 c = position_mean(phi);
  double s = 0, n = 0;
  for (int j = 0; j < phi.grid.ny; ++j)
    for (int i = 0; i < phi.grid.nx; ++i) {
      const double a = std::norm(phi.data(j, i));
      s += a * (Vec2(phi.grid.x(i), phi.grid.y(j)) - c).squaredNorm();
      n += a;
    }
  return std::sqrt(s / n);
}

}  // namespace

Sinogram scan_sinogram(const Field2D& phi, const Field2D& psi, const Scene& scene, const PipelineOptions& opt) {
  const double rp = packet_reach(phi, psi, opt.packet_radius);
  ScanOptions so = opt.scan;
  if (so.sandwich.packet_radius <= 0) so.sandwich.packet_radius = rp;
  auto sampler = [&](double theta, double s) {
    SinogramSample out;
    const Vec2 y = s * normal(theta);
    if (opt.support_radius > 0 && std::abs(s) > opt.support_radius + rp) return out;
    const ScanResult r = hv_scan(phi, psi, y, direction(theta), scene, so);
    out.value = r.limit;
    out.rho = r.rho;
    out.residual = r.residual;
    for (const auto& p : r.points)
      if (!p.skipped) out.v_max = p.v;
    for (const auto& f : r.flags) out.flag += (out.flag.empty() ? "" : "; ") + f;
    return out;
  };
  return assemble_sinogram(uniform_angles(opt.n_angles), uniform_offsets(opt.n_offsets, opt.ds), sampler, opt.workers,
                           opt.progress);
}

Sinogram oracle_sinogram(const Field2D& phi, const Field2D& psi, const Scene& scene, const PipelineOptions& opt) {
  const double rp = packet_reach(phi, psi, opt.packet_radius);
  auto sampler = [&](double theta, double s) {
    SinogramSample out;
    if (opt.support_radius > 0 && std::abs(s) > opt.support_radius + rp) return out;
    const Vec2 y = s * normal(theta), vh = direction(theta);
    out.value = opt.scan.quantity == ScanQuantity::commutator ? xray_rhs(phi, psi, y, vh, opt.scan.l, scene.V)
                                                              : xray_potential(phi, psi, y, vh, scene.V.vs);
    return out;
  };
  return assemble_sinogram(uniform_angles(opt.n_angles), uniform_offsets(opt.n_offsets, opt.ds), sampler, opt.workers);
}

namespace {

PipelineResult run_pipeline(const Field2D& phi, const Scene& scene, const std::vector<Vec2>& centres,
                            const PipelineOptions& opt, ScanQuantity q) {
  const auto t0 = std::chrono::steady_clock::now();
  PipelineOptions o = opt;
  o.scan.quantity = q;
  if (q == ScanQuantity::commutator) o.scan.l = 1;
  PipelineResult r;
  r.overlap = inner(phi, phi);
  r.sinogram = scan_sinogram(phi, phi, scene, o);
  const double rp = packet_reach(phi, phi, o.packet_radius);
  for (std::size_t k = 0; k < r.sinogram.meta.size(); ++k) {
    const double s = r.sinogram.s[k % r.sinogram.s.size()];
    if (o.support_radius > 0 && std::abs(s) > o.support_radius + rp)
      ++r.samples_local_zero;
    else
      ++r.samples_run;
    if (!r.sinogram.meta[k].flag.empty()) ++r.samples_flagged;
  }
  r.image = radon_invert(r.sinogram, o.image, o.fbp);
  r.centres = centres;
  const double w = smear(phi);
  r.estimate = q == ScanQuantity::commutator ? pointwise_potential(r.image.image, o.image, centres, r.overlap, w)
                                             : pointwise_from_h(r.image.image, o.image, centres, r.overlap, w);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

PipelineResult pointwise_pipeline(const Field2D& phi, const Scene& scene, const std::vector<Vec2>& centres,
                                  const PipelineOptions& opt) {
  return run_pipeline(phi, scene, centres, opt, ScanQuantity::commutator);
}

PipelineResult recover_vs(const Field2D& phi, const Scene& scene, const std::vector<Vec2>& centres,
                                  const PipelineOptions& opt) {
  return run_pipeline(phi, scene, centres, opt, ScanQuantity::vs_only);
}

}  // namespace hvs
