#include "hvscat/scattering.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "hvscat/quadrature.hpp"

namespace hvs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Radius outside of which a term is a tail rather than a core.
double core_radius(const PotentialTerm& t) {
  switch (t.family) {
    case Family::gaussian: return t.negligible_radius(1e-12 * std::abs(t.amplitude));
    case Family::bump: return t.width;
    default: return 2 * t.width;
  }
}

double scene_radius(const PairPotential& V) {
  double R = 0;
  for (const auto& t : V.terms()) R = std::max(R, t.center.norm() + core_radius(t));
  return R;
}

/// exp(-i tau p^2 / 2 mu) on the momentum lattice.
CArray kinetic_phase(const Grid2D& g, double tau, double mu) {
  CArray k(g.ny, g.nx);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double p2 = g.px(i) * g.px(i) + g.py(j) * g.py(j);
      k(j, i) = std::polar(1.0, -tau * p2 / (2 * mu));
    }
  return k;
}

CArray unit_phase(const RArray& theta, double sign) {
  CArray out(theta.rows(), theta.cols());
  for (Eigen::Index j = 0; j < theta.rows(); ++j)
    for (Eigen::Index i = 0; i < theta.cols(); ++i) out(j, i) = std::polar(1.0, sign * theta(j, i));
  return out;
}

void apply_momentum_multiplier(Field2D& f, const CArray& m) {
  to_momentum(f);
  f.data *= m;
  to_position(f);
}

/// Breakpoints 0, +-ell 2^k inside (-reach, reach), plus the ends.
std::vector<double> geometric_breaks(double ell, double reach) {
  std::vector<double> pos;
  for (double s = ell; s < reach; s *= 2) pos.push_back(s);
  std::vector<double> pts{-reach};
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) pts.push_back(-*it);
  pts.push_back(0.0);
  pts.insert(pts.end(), pos.begin(), pos.end());
  pts.push_back(reach);
  return pts;
}

double rel_change(const Field2D& a, const Field2D& b) {
  const double n = std::sqrt(b.data.abs2().sum());
  const double d = std::sqrt((a.data - b.data).abs2().sum());
  return n > 0 ? d / n : d;
}

}  // namespace

double DollardModifier::theta(const Vec2& p, double t) const {
  if (trivial() || t == 0) return 0.0;
  const double a = sp_.half_accel(), mu = sp_.mu;
  auto f = [&](double s) { return Vl_.value(Vec2(s * p(0) / mu + a * s * s, s * p(1) / mu)); };
  QuadOptions o;
  o.abs_tol = tol_;
  o.what = "dollard_phase";
  const auto r = integrate(f, std::min(0.0, t), std::max(0.0, t), o);
  return t > 0 ? r.value : -r.value;
}

RArray DollardModifier::phase(const Grid2D& g, double t, const Vec2& offset) const {
  RArray out = RArray::Zero(g.ny, g.nx);
  if (trivial() || t == 0) return out;
  const double a = sp_.half_accel(), mu = sp_.mu;
  const double lo = std::min(0.0, t), hi = std::max(0.0, t);
  double worst = 0;
  Vec2 worst_p = Vec2::Zero();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 p = Vec2(g.px(i), g.py(j)) + offset;
      auto f = [&](double s) { return Vl_.value(Vec2(s * p(0) / mu + a * s * s, s * p(1) / mu)); };
      double err = 0;
      const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, 24, 1e-13, &err);
      out(j, i) = t > 0 ? v : -v;
      if (!(err <= worst)) {
        worst = err;
        worst_p = p;
      }
    }
  if (!(worst <= tol_)) {
    std::ostringstream os;
    os << "dollard_phase: error estimate " << worst << " above " << tol_ << " at p = (" << worst_p(0) << ", "
       << worst_p(1) << "), t = " << t;
    throw ToleranceError(os.str());
  }
  return out;
}

cplx graf_integral(double a, double b, const Vec2& v, const StarkParams& sp, const PairPotential& Vs,
                   const Vec2& shift, double tol) {
  if (Vs.empty() || a == b) return cplx(1, 0);
  const double sign = a < b ? 1.0 : -1.0;
  if (a > b) std::swap(a, b);
  const double speed = v.norm(), acc = std::abs(sp.half_accel());
  if (speed == 0 && acc == 0) throw DomainError("graf_integral: stationary trajectory");
  const double R = shift.norm() + scene_radius(Vs);
  double ell = speed > 0 ? R / speed : std::sqrt(R / acc);
  if (acc > 0) ell = std::min(ell, std::sqrt(R / acc));
  ell = std::max(ell, 1e-6);
  // beyond `reach` the trajectory is far out on the tail
  double reach = 64 * ell;
  if (acc > 0 && speed > 0) reach = std::max(reach, 8 * speed / acc);

  auto f = [&](double s) { return Vs.value(shift + sp.trajectory(v, s)); };
  QuadOptions o;
  o.abs_tol = tol / 3;
  o.what = "graf_integral";
  double J = 0;
  std::vector<double> pts;
  for (double s : geometric_breaks(ell, reach))
    if (s > a && s < b) pts.push_back(s);
  const double lo = std::isfinite(a) ? a : -reach, hi = std::isfinite(b) ? b : reach;
  if (lo < hi) {
    pts.insert(pts.begin(), lo);
    pts.push_back(hi);
    J += integrate_pieces(f, pts, o).value;
  }
  const double beta = Vs.slowest_decay() * (acc > 0 ? 2.0 : 1.0);
  if (!std::isfinite(b) || !std::isfinite(a)) {
    if (!(beta > 1)) throw DomainError("graf_integral: the short-range tail is not integrable along the trajectory");
  }
  if (!std::isfinite(b)) J += integrate_to_infinity(f, hi, beta, reach, o).value;
  if (!std::isfinite(a)) J += integrate_to_infinity([&](double s) { return f(-s); }, -lo, beta, reach, o).value;
  return std::polar(1.0, -sign * J);
}

double potential_extent(const PairPotential& V) { return scene_radius(V); }

double default_T0(const Scene& scene, double speed, const Vec2& y, double packet_radius) {
  if (!(speed > 0)) throw DomainError("default_T0: speed must be positive");
  const double R = scene_radius(scene.V.total()) + y.norm() + packet_radius;
  return std::max(R / speed, 1e-3);
}

namespace {

/// Free comoving evolution with the Dollard factor: e^{-itK} e^{-i Theta(p + off, t)} f.
Field2D modified_free(const Field2D& f, double t, const DollardModifier& D, const Vec2& off, double mu) {
  CArray m = kinetic_phase(f.grid, t, mu);
  if (!D.trivial()) m *= unit_phase(D.phase(f.grid, t, off), -1.0);
  Field2D out = f;
  apply_momentum_multiplier(out, m);
  return out;
}

/// Largest |t| <= cap, found by doubling from `start` then bisection, at which every
/// freely evolved packet keeps its relative margin mass below 1e-10. 0 if even `start` fails.
double free_fit_time(const std::vector<const Field2D*>& fields, const DollardModifier& D, const Vec2& off, double mu,
                     double strip, double start, double cap) {
  auto fits = [&](double t) {
    for (double s : {t, -t})
      for (const Field2D* f : fields) {
        const Field2D e = modified_free(*f, s, D, off, mu);
        if (boundary_mass(e, strip) > 1e-10 * f->data.abs2().sum() * f->grid.cell()) return false;
      }
    return true;
  };
  if (!fits(start)) return 0;
  double lo = start, hi = 2 * start;
  while (lo < cap && fits(std::min(hi, cap))) {
    lo = std::min(hi, cap);
    hi *= 2;
  }
  if (lo >= cap) return cap;
  hi = std::min(hi, cap);
  for (int k = 0; k < 30 && hi - lo > 1e-3 * hi; ++k) {
    const double m = 0.5 * (lo + hi);
    (fits(m) ? lo : hi) = m;
  }
  return lo;
}

}  // namespace

ScatterRun apply_sandwich(const std::vector<Field2D>& phi0, const Scene& scene, const Vec2& v, const Vec2& y,
                          const EvolutionPlan& plan, const SandwichOptions& opt) {
  const auto wall0 = std::chrono::steady_clock::now();
  if (phi0.empty()) throw DomainError("apply_sandwich: no input fields");
  const Grid2D g = phi0.front().grid;
  for (const auto& f : phi0)
    if (f.grid != g) throw ShapeError("apply_sandwich: grid mismatch");
  const StarkParams& sp = scene.sp;
  sp.validate();
  const PairPotential Vtot = scene.V.total();
  const DollardModifier D(opt.dollard ? scene.V.l : PairPotential(), sp);
  const bool tail = opt.graf_tail && !scene.V.s.empty();
  EvolutionPlan pl = plan;
  pl.v = v;
  pl.gauge = Gauge::comoving;
  if (pl.margin <= 0) pl.margin = default_margin(g);
  pl.margin_tol = opt.margin_tol;
  const Vec2 off = sp.mu * v;

  ScatterRun run;
  auto at = [&](double T) {
    std::vector<Field2D> f = phi0;
    const CArray K = kinetic_phase(g, -T, sp.mu);  // e^{iTK}
    CArray pre = K, post = K;
    if (!D.trivial()) {
      pre *= unit_phase(D.phase(g, -T, off), -1.0);
      post *= unit_phase(D.phase(g, T, off), 1.0);
    }
    for (auto& x : f) apply_momentum_multiplier(x, pre);
    std::vector<Field2D*> ptr;
    for (auto& x : f) ptr.push_back(&x);
    EvolutionPlan pT = pl;
    pT.T = std::max(2 * T, pl.dt);
    const EvolveStats st = evolve(ptr, -T, T, pT, Vtot, sp, y);
    run.steps += st.steps;
    run.boundary_mass = std::max(run.boundary_mass, st.boundary_mass);
    if (st.potential_steps > 0)
      for (const auto& x : phi0)
        for (double t : {st.first_active, st.last_active}) {
          // the free packet must fit the box while the potential acts
          const Field2D e = modified_free(x, t, D, off, sp.mu);
          if (boundary_mass(e, pl.margin) > 1e-10 * x.data.abs2().sum() * g.cell())
            throw GeometryError("apply_sandwich: free packet reaches the margin at t = " + fmt_g(t));
        }
    cplx c(1, 0);
    if (tail)
      c = graf_integral(-kInf, -T, v, sp, scene.V.s, y) * graf_integral(T, kInf, v, sp, scene.V.s, y);
    for (auto& x : f) {
      apply_momentum_multiplier(x, post);
      x.data *= c;
    }
    return f;
  };

  double T = opt.T0 > 0 ? opt.T0 : default_T0(scene, v.norm(), y, opt.packet_radius);
  if (T > opt.T_max) throw DomainError("apply_sandwich: T0 exceeds T_max");
  // doubling stops where the free packets would leave the box
  std::vector<const Field2D*> in;
  for (const auto& x : phi0) in.push_back(&x);
  const double T_cap = free_fit_time(in, D, off, sp.mu, pl.margin, T, opt.T_max);
  if (!(T_cap > 0)) throw GeometryError("apply_sandwich: free packets reach the margin by T0 = " + fmt_g(T));
  run.T_cap = T_cap;
  std::vector<Field2D> prev = at(T);
  for (int k = 1; k <= opt.max_doublings && 2 * T <= T_cap * (1 + 1e-12); ++k) {
    std::vector<Field2D> cur;
    try {
      cur = at(2 * T);
    } catch (const GeometryError& e) {
      // scattered waves reach the boundary: keep the last good T
      run.stop_reason = e.what();
      break;
    }
    T *= 2;
    double d = 0;
    for (std::size_t i = 0; i < cur.size(); ++i) d = std::max(d, rel_change(prev[i], cur[i]));
    run.cauchy.push_back({T, d});
    prev = std::move(cur);
    if (d <= opt.tol) run.converged = true;
    if (run.converged && k >= opt.min_doublings && !opt.record_all) break;
  }
  if (!run.cauchy.empty()) run.converged = run.cauchy.back().diff <= opt.tol;
  run.T = T;
  run.out = std::move(prev);
  run.norm_in = norm(phi0.front());
  run.norm_out = norm(run.out.front());
  run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return run;
}

ScatterRun apply_sd(const Field2D& psi, const Scene& scene, const Vec2& v, const EvolutionPlan& plan,
                    const SandwichOptions& opt) {
  const Field2D phi0 = boost(psi, scene.sp.mu, -v);
  ScatterRun run = apply_sandwich({phi0}, scene, v, Vec2::Zero(), plan, opt);
  run.out.front() = boost(run.out.front(), scene.sp.mu, v);
  return run;
}

CommutatorResult commutator_element(const Field2D& Phi0, const Field2D& Psi0, double speed, const Vec2& vhat,
                                    const Vec2& y, int l, const Scene& scene, const EvolutionPlan& plan,
                                    const SandwichOptions& opt) {
  CommutatorResult r;
  if (scene.V.total().empty()) {
    // S^D is the identity; no propagation needed
    r.value = speed * cplx(0, 1) * (inner(momentum_op(Phi0, l), Psi0) - inner(Phi0, momentum_op(Psi0, l)));
    r.run.converged = true;
    r.run.norm_in = r.run.norm_out = norm(Phi0);
    return r;
  }
  r.run = apply_sandwich({momentum_op(Phi0, l), Phi0}, scene, speed * vhat, y, plan, opt);
  r.value = speed * cplx(0, 1) * (inner(r.run.out[0], Psi0) - inner(r.run.out[1], momentum_op(Psi0, l)));
  return r;
}


namespace {

/// The correction integrand with the momentum-space packets cached across t.
class CorrectionIntegrand {
 public:
  CorrectionIntegrand(const Field2D& Phi0, const Field2D& Psi0, const Vec2& v, const Vec2& y, const Scene& scene,
                      int sign)
      : g_(Phi0.grid), v_(v), y_(y), scene_(scene), sign_(sign), same_(&Phi0 == &Psi0), D_(scene.V.l, scene.sp),
        pa_(Phi0), pb_(Psi0) {
    if (Phi0.grid != Psi0.grid) throw ShapeError("sd_correction_integrand: grid mismatch");
    to_momentum(pa_);
    if (!same_) to_momentum(pb_);
  }

  cplx operator()(double t) const {
    const PairPotential &Vs = scene_.V.s, &Vl = scene_.V.l;
    if (Vs.empty() && Vl.empty()) return cplx(0, 0);
    const StarkParams& sp = scene_.sp;
    const Vec2 X = sp.trajectory(v_, t);
    CArray m = kinetic_phase(g_, t, sp.mu);
    if (!D_.trivial()) m *= unit_phase(D_.phase(g_, t, sp.mu * v_), -1.0);
    Field2D a(g_, pa_.data * m);
    to_position(a);
    Field2D bb;
    if (!same_) {
      bb = Field2D(g_, pb_.data * m);
      to_position(bb);
    }
    const Field2D& b = same_ ? a : bb;

    RArray W = RArray::Zero(g_.ny, g_.nx);
    if (!Vs.empty()) W += sample(Vs, g_, y_ + X) - Vs.value(X);
    if (!Vl.empty()) W += sample(Vl, g_, y_ + X);
    cplx s = (W * a.data * b.data.conjugate()).sum() * g_.cell();

    if (!Vl.empty()) {
      // trajectory term on the momentum lattice, where the free and Dollard phases cancel
      const Field2D& fb = same_ ? pa_ : pb_;
      const double c = (2 + sign_) * sp.half_accel() * t * t;
      cplx acc(0, 0);
      for (int j = 0; j < g_.ny; ++j)
        for (int i = 0; i < g_.nx; ++i) {
          const Vec2 q = t * Vec2(g_.px(i), g_.py(j)) / sp.mu + v_ * t + Vec2(c, 0);
          acc += Vl.value(q) * pa_.data(j, i) * std::conj(fb.data(j, i));
        }
      s -= acc * g_.cell();
    }
    return s;
  }

 private:
  Grid2D g_;
  Vec2 v_, y_;
  const Scene& scene_;
  int sign_;
  bool same_;
  DollardModifier D_;
  Field2D pa_, pb_;
};

}  // namespace

cplx sd_correction_integrand(double t, const Field2D& Phi0, const Field2D& Psi0, const Vec2& v, const Vec2& y,
                             const Scene& scene, int sign) {
  if (scene.V.s.empty() && scene.V.l.empty()) return cplx(0, 0);
  return CorrectionIntegrand(Phi0, Psi0, v, y, scene, sign)(t);
}

CorrectionResult sd_correction_element(const Field2D& Phi0, const Field2D& Psi0, double speed, const Vec2& vhat,
                                       const Vec2& y, const Scene& scene, double tol) {
  CorrectionResult r;
  const PairPotential &Vs = scene.V.s, &Vl = scene.V.l;
  if (Vs.empty() && Vl.empty()) return r;
  const StarkParams& sp = scene.sp;
  const Vec2 v = speed * vhat;
  const Grid2D& g = Phi0.grid;
  const DollardModifier D(Vl, sp);
  const Vec2 off = sp.mu * v;
  const double strip = default_margin(g);

  const double ell = std::max(1e-6, (scene_radius(Vs + Vl) + y.norm()) / speed);
  const double lo = free_fit_time({&Phi0, &Psi0}, D, off, sp.mu, strip, ell / 8, 1e6);
  r.t_grid = lo;
  if (!(lo > 0)) throw GeometryError("sd_correction_element: packets do not fit the grid");

  const CorrectionIntegrand f(Phi0, Psi0, v, y, scene, -1);
  QuadOptions o;
  o.abs_tol = tol;
  o.what = "sd_correction_element";
  auto q = integrate_pieces(f, geometric_breaks(std::min(ell, lo / 2), lo), o);
  r.value = q.value;
  r.error = q.error;

  if (!Vs.empty() && Vl.empty()) {
    // second-order expansion about y + X(t) with the exact free moments
    Field2D pPhi[2] = {momentum_op(Phi0, 1), momentum_op(Phi0, 2)};
    Field2D xPhi[2] = {Phi0, Phi0};
    const Eigen::ArrayXd xs = g.xs(), ys = g.ys();
    for (int j = 0; j < g.ny; ++j) {
      xPhi[0].data.row(j) *= xs.transpose().cast<cplx>();
      xPhi[1].data.row(j) *= ys(j);
    }
    const cplx m0 = inner(Phi0, Psi0);
    Eigen::Vector2cd mx, mp;
    Eigen::Matrix2cd Mxx, Mxp, Mpx, Mpp;
    for (int a = 0; a < 2; ++a) {
      mx(a) = inner(xPhi[a], Psi0);
      mp(a) = inner(pPhi[a], Psi0);
      for (int b = 0; b < 2; ++b) {
        // x_a x_b, x_a p_b, p_a x_b, p_a p_b applied to Phi0
        Field2D xx = xPhi[b], xp = pPhi[b];
        for (int j = 0; j < g.ny; ++j) {
          if (a == 0) {
            xx.data.row(j) *= xs.transpose().cast<cplx>();
            xp.data.row(j) *= xs.transpose().cast<cplx>();
          } else {
            xx.data.row(j) *= ys(j);
            xp.data.row(j) *= ys(j);
          }
        }
        Mxx(a, b) = inner(xx, Psi0);
        Mxp(a, b) = inner(xp, Psi0);
        Mpx(a, b) = inner(momentum_op(xPhi[b], a + 1), Psi0);
        Mpp(a, b) = inner(momentum_op(pPhi[b], a + 1), Psi0);
      }
    }
    auto expansion = [&](double t) {
      const Vec2 X = sp.trajectory(v, t);
      const double u = t / sp.mu;
      const Eigen::Vector2cd m1 = mx + u * mp;
      const Eigen::Matrix2cd M2 = Mxx + u * (Mxp + Mpx) + u * u * Mpp;
      const Vec2 c = y + X;
      const Eigen::Matrix2d H = Vs.hessian(c);
      cplx s = (Vs.value(c) - Vs.value(X)) * m0;
      s += Vs.gradient(c)(0) * m1(0) + Vs.gradient(c)(1) * m1(1);
      s += 0.5 * (H(0, 0) * M2(0, 0) + H(0, 1) * (M2(0, 1) + M2(1, 0)) + H(1, 1) * M2(1, 1));
      return s;
    };
    const double beta = (sp.half_accel() != 0 ? 2.0 : 1.0) * (Vs.slowest_decay() + 1) - 1;
    QuadOptions ot = o;
    ot.what = "sd_correction_element tail";
    const auto up = integrate_to_infinity(expansion, lo, beta, lo, ot);
    const auto dn = integrate_to_infinity([&](double s) { return expansion(-s); }, lo, beta, lo, ot);
    r.tail = up.value + dn.value;
    r.value += r.tail;
    r.error += up.error + dn.error;
  }
  r.value *= speed;
  r.error *= speed;
  return r;
}

}  // namespace hvs
