#include "doctest.h"
#include "hvscat/propagator.hpp"

using namespace hvs;

namespace {

Grid2D grid() { return Grid2D{256, 256, 64, 64}; }

Field2D packet(const Grid2D& g, Vec2 x0 = Vec2(-4, 1), Vec2 p0 = Vec2(0.6, -0.3)) {
  PacketSpec s;
  s.w = 1.2;
  s.x0 = x0;
  s.p0 = p0;
  return make_packet(g, s);
}

double rel_diff(const Field2D& a, const Field2D& b) {
  return std::sqrt((a.data - b.data).abs2().sum() / b.data.abs2().sum());
}

PairPotential gaussian_potential(double A, double w, Vec2 c = Vec2::Zero()) {
  PotentialTerm t;
  t.cls = ClassTag::vsE;
  t.amplitude = A;
  t.width = w;
  t.center = c;
  return PairPotential({t});
}

}  // namespace

TEST_CASE("free_evolve_exact: identity and group law") {
  const Grid2D g = grid();
  StarkParams sp{0.5, 1.0, 1.0};
  Field2D f = packet(g);
  CHECK((free_evolve_exact(f, 0.0, sp).data - f.data).abs().maxCoeff() == 0.0);
  Field2D a = free_evolve_exact(free_evolve_exact(f, 0.7, sp), 0.9, sp);
  Field2D b = free_evolve_exact(f, 1.6, sp);
  CHECK(rel_diff(a, b) <= 1e-10);
  Field2D c = free_evolve_exact(free_evolve_exact(f, 1.1, sp), -1.1, sp);
  CHECK(rel_diff(c, f) <= 1e-10);
  CHECK(std::abs(norm(b) - 1) <= 1e-12);
}

TEST_CASE("free_evolve_exact follows the classical trajectory") {
  const Grid2D g = grid();
  const Vec2 x0(-4, 1), p0(0.6, -0.3);
  for (double q : {0.0, 1.0, -1.0}) {
    StarkParams sp{0.5, q, 1.0};
    Field2D f = packet(g, x0, p0);
    for (double t : {0.5, 1.0, 1.5, 2.0}) {
      const Vec2 expect = x0 + p0 * t / sp.mu + Vec2(q * sp.E * t * t / (2 * sp.mu), 0);
      CHECK((position_mean(free_evolve_exact(f, t, sp)) - expect).norm() <= 2 * g.dx());
    }
  }
}

TEST_CASE("free_evolve_exact rejects drift into the margin") {
  StarkParams sp{0.5, 1.0, 1.0};
  CHECK_THROWS_AS(free_evolve_exact(packet(grid()), 9.0, sp), GeometryError);
}

TEST_CASE("lab split-step matches the exact free evolution") {
  const Grid2D g = grid();
  StarkParams sp{0.5, 1.0, 1.0};
  EvolutionPlan plan;
  plan.dt = 1e-3;
  plan.gauge = Gauge::lab;
  Field2D f = packet(g);
  Field2D num = evolve(f, 0.0, 1.0, plan, PairPotential(), sp);
  Field2D ex = free_evolve_exact(f, 1.0, sp);
  CHECK(rel_diff(num, ex) <= 1e-6);
}

TEST_CASE("comoving evolution without potential is pure dispersion") {
  const Grid2D g = grid();
  StarkParams sp{0.5, 1.0, 1.0};
  EvolutionPlan plan;
  plan.dt = 0.01;
  plan.v = Vec2(3, 1);
  Field2D f = packet(g);
  Field2D a = evolve(f, -1.0, 1.5, plan, PairPotential(), sp);
  StarkParams none{0.5, 0.0, 1.0};
  Field2D b = free_evolve_exact(f, 2.5, none);
  CHECK(rel_diff(a, b) <= 1e-12);
  Field2D back = evolve(a, 1.5, -1.0, plan, PairPotential(), sp);
  CHECK(rel_diff(back, f) <= 1e-9);
  CHECK((evolve(f, 0.3, 0.3, plan, PairPotential(), sp).data - f.data).abs().maxCoeff() == 0.0);
}

TEST_CASE("comoving step is unitary and second order") {
  const Grid2D g = grid();
  StarkParams sp{0.5, 1.0, 1.0};
  const PairPotential V = gaussian_potential(2.0, 1.5);
  const Vec2 v(2, 0.5);
  Field2D f = packet(g, Vec2(0, 0), Vec2(0, 0));
  Field2D s = comoving_step(f, -0.4, 0.05, V, sp, v);
  CHECK(std::abs(norm(s) - 1) <= 1e-12);

  auto run = [&](double dt) {
    EvolutionPlan plan;
    plan.dt = dt;
    plan.v = v;
    return evolve(f, -1.0, 1.0, plan, V, sp);
  };
  Field2D a = run(0.04), b = run(0.02), c = run(0.01);
  const double e1 = rel_diff(a, b), e2 = rel_diff(b, c);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
  CHECK(std::abs(norm(c) - 1) <= 1e-10);
}

TEST_CASE("graded steps are symmetric about zero") {
  EvolutionPlan plan;
  plan.dt = 0.01;
  plan.t_core = 0.5;
  plan.dt_max = 0.2;
  auto n = time_nodes(-7.0, 7.0, plan);
  for (std::size_t i = 0; i < n.size(); ++i) CHECK(n[i] == doctest::Approx(-n[n.size() - 1 - i]));
  for (std::size_t i = 0; i + 1 < n.size(); ++i) CHECK(n[i + 1] - n[i] <= 0.2 + 1e-12);
  CHECK(n.front() == -7.0);
  CHECK(n.back() == 7.0);
}

TEST_CASE("comoving gauge agrees with a lab run") {
  const Grid2D g{256, 256, 64, 64};
  StarkParams sp{0.5, 1.0, 1.0};
  const Vec2 v(1.5, 0.5);
  // potential centred where the packet passes at t ~ 1
  const PairPotential V = gaussian_potential(1.0, 1.5, Vec2(1.5, 0.5) + Vec2(0.5, 0));
  Field2D phi = packet(g, Vec2(0, 0), Vec2(0, 0));

  EvolutionPlan co;
  co.dt = 1e-3;
  co.v = v;
  Field2D phi_t = phi;
  // the comoving potential is V(y + X(t)), i.e. V shifted by the trajectory
  evolve({&phi_t}, 0.0, 2.0, co, V, sp);

  EvolutionPlan lab = co;
  lab.gauge = Gauge::lab;
  Field2D psi = comoving_to_lab(phi, 0.0, sp, v);
  evolve({&psi}, 0.0, 2.0, lab, V, sp);

  CHECK(rel_diff(comoving_to_lab(phi_t, 2.0, sp, v), psi) <= 1e-5);
}
