#include "hvscat/propagator.hpp"

#include <cmath>

namespace hvs {

void StarkParams::validate() const {
  if (!(mu > 0)) throw DomainError("StarkParams: mu > 0");
  if (!(E > 0)) throw DomainError("StarkParams: E > 0");
}

void EvolutionPlan::validate() const {
  if (!(dt > 0)) throw DomainError("EvolutionPlan: dt > 0");
  if (!(T >= dt)) throw DomainError("EvolutionPlan: T >= dt");
  if (!(t_core > 0) || !(dt_max >= dt)) throw DomainError("EvolutionPlan: bad step grading");
}

double default_dt(const Grid2D& g, const StarkParams& sp, double vmax) {
  const double h = std::min(g.dx(), g.dy());
  double dt = 0.1 * sp.mu * h * h / M_PI;
  if (vmax > 0) dt = std::min(dt, 0.05 / vmax);
  return dt;
}

namespace {

void kinetic(Field2D& f, double tau, double mu) {
  if (tau == 0) return;
  const Grid2D& g = f.grid;
  Eigen::ArrayXcd ax(g.nx), ay(g.ny);
  for (int i = 0; i < g.nx; ++i) ax(i) = std::polar(1.0, -tau * g.px(i) * g.px(i) / (2 * mu));
  for (int j = 0; j < g.ny; ++j) ay(j) = std::polar(1.0, -tau * g.py(j) * g.py(j) / (2 * mu));
  for (int j = 0; j < g.ny; ++j) f.data.row(j) *= ay(j) * ax.transpose();
}

}  // namespace

double grid_sup(const PairPotential& V, const Grid2D& g, const Vec2& s) {
  const Vec2 lo(g.x(0), g.y(0)), hi(g.x(g.nx - 1), g.y(g.ny - 1));
  double sup = 0;
  for (const auto& t : V.terms()) {
    const Vec2 c = t.center - s;
    const Vec2 d = (lo - c).cwiseMax(c - hi).cwiseMax(0.0);
    sup += std::abs(t.radial(d.norm()));
  }
  return sup;
}

Field2D free_evolve_exact(const Field2D& f, double t, const StarkParams& sp, double margin) {
  Field2D out = f;
  if (t == 0) return out;
  const double F = sp.force(), mu = sp.mu;
  to_momentum(out);
  kinetic(out, t, mu);
  const double shift = F * t * t / (2 * mu);
  const Eigen::ArrayXd kx = f.grid.pxs();
  Eigen::ArrayXcd ax(f.grid.nx);
  for (int i = 0; i < f.grid.nx; ++i) ax(i) = std::polar(1.0, -kx(i) * shift);
  for (int j = 0; j < f.grid.ny; ++j) out.data.row(j) *= ax.transpose();
  to_position(out);
  const cplx scalar = std::polar(1.0, -t * t * t * F * F / (6 * mu));
  apply_plane_wave(out, Vec2(F * t, 0));
  out.data *= scalar;
  check_margin(out, margin < 0 ? default_margin(f.grid) : margin, "free_evolve_exact");
  return out;
}

std::vector<double> time_nodes(double t0, double t1, const EvolutionPlan& plan) {
  std::vector<double> nodes;
  if (t0 == t1) return {t0};
  const double lo = std::min(t0, t1), hi = std::max(t0, t1);
  if (!std::isfinite(plan.t_core)) {
    const long n = std::max<long>(1, static_cast<long>(std::ceil((hi - lo) / plan.dt - 1e-9)));
    for (long k = 0; k <= n; ++k) nodes.push_back(lo + (hi - lo) * k / n);
  } else {
    // positive half-sequence, mirrored so a symmetric interval gets symmetric steps
    const double reach = std::max(std::abs(lo), std::abs(hi));
    std::vector<double> pos{0.0};
    while (pos.back() < reach) {
      const double t = pos.back();
      pos.push_back(t + std::min(plan.dt_max, plan.dt * std::max(1.0, t / plan.t_core)));
    }
    std::vector<double> all;
    for (auto it = pos.rbegin(); it != pos.rend(); ++it)
      if (*it > 0) all.push_back(-*it);
    all.insert(all.end(), pos.begin(), pos.end());
    nodes.push_back(lo);
    for (double t : all)
      if (t > lo + 1e-12 * plan.dt && t < hi - 1e-12 * plan.dt) nodes.push_back(t);
    nodes.push_back(hi);
  }
  if (t1 < t0) std::reverse(nodes.begin(), nodes.end());
  return nodes;
}

EvolveStats evolve(const std::vector<Field2D*>& fields, double t0, double t1, const EvolutionPlan& plan,
                   const PairPotential& V, const StarkParams& sp, const Vec2& shift) {
  plan.validate();
  sp.validate();
  EvolveStats st;
  if (fields.empty() || t0 == t1) return st;
  const Grid2D g = fields.front()->grid;
  for (auto* f : fields)
    if (f->grid != g) throw ShapeError("evolve: grid mismatch");

  const auto nodes = time_nodes(t0, t1, plan);
  const bool lab = plan.gauge == Gauge::lab;
  const Eigen::ArrayXd X = g.xs();
  for (auto* f : fields) to_momentum(*f);
  double tau = 0;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const double h = nodes[k + 1] - nodes[k];
    const double tm = 0.5 * (nodes[k] + nodes[k + 1]);
    ++st.steps;
    tau += 0.5 * h;
    const Vec2 s = lab ? shift : Vec2(shift + sp.trajectory(plan.v, tm));
    const bool active = lab || grid_sup(V, g, s) > plan.skip_eps;
    if (active) {
      if (st.potential_steps == 0) st.first_active = tm;
      st.last_active = tm;
      ++st.potential_steps;
      RArray pot = sample(V, g, s);
      if (lab) pot.rowwise() -= (sp.force() * X).transpose();
      CArray phase(g.ny, g.nx);
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) phase(j, i) = pot(j, i) == 0 ? cplx(1, 0) : std::polar(1.0, -h * pot(j, i));
      for (auto* f : fields) {
        kinetic(*f, tau, sp.mu);
        to_position(*f);
        if (plan.margin > 0) {
          const double m = boundary_mass(*f, plan.margin) / (f->data.abs2().sum() * g.cell());
          st.boundary_mass = std::max(st.boundary_mass, m);
          if (m > plan.margin_tol)
            throw GeometryError("evolve: relative mass " + fmt_g(m) + " inside the margin at t = " + fmt_g(tm));
        }
        f->data *= phase;
        to_momentum(*f);
      }
      tau = 0;
    }
    tau += 0.5 * h;
  }
  for (auto* f : fields) {
    kinetic(*f, tau, sp.mu);
    to_position(*f);
  }
  return st;
}

Field2D evolve(const Field2D& f, double t0, double t1, const EvolutionPlan& plan, const PairPotential& V,
               const StarkParams& sp) {
  Field2D out = f;
  evolve({&out}, t0, t1, plan, V, sp);
  if (plan.gauge == Gauge::lab) check_margin(out, default_margin(f.grid), "evolve");
  return out;
}

Field2D comoving_step(const Field2D& f, double t, double dt, const PairPotential& V, const StarkParams& sp,
                      const Vec2& v, const Vec2& shift) {
  EvolutionPlan plan;
  plan.dt = std::abs(dt);
  plan.T = plan.dt;
  plan.v = v;
  plan.skip_eps = -1;  // always apply the potential factor
  Field2D out = f;
  evolve({&out}, t, t + dt, plan, V, sp, shift);
  return out;
}

Field2D comoving_to_lab(const Field2D& phi, double t, const StarkParams& sp, const Vec2& v) {
  const double F = sp.force(), mu = sp.mu;
  const Vec2 X = sp.trajectory(v, t);
  const Vec2 P = mu * v + Vec2(F * t, 0);
  const double beta = -(mu * v.squaredNorm() * t / 2 + F * v(0) * t * t / 2 + F * F * t * t * t / (6 * mu));
  Field2D out = translate(phi, X);
  apply_plane_wave(out, P);
  out.data *= std::polar(1.0, beta);
  return out;
}

}  // namespace hvs
