#include <random>

#include "doctest.h"
#include "hvscat/grid.hpp"
#include "hvscat/potentials.hpp"

using namespace hvs;

namespace {

PotentialTerm term(Family f, ClassTag c, double A, double w, double beta = 1.0, Vec2 c0 = Vec2::Zero()) {
  PotentialTerm t;
  t.family = f;
  t.cls = c;
  t.amplitude = A;
  t.width = w;
  t.exponent = beta;
  t.center = c0;
  return t;
}

}  // namespace

TEST_CASE("family values") {
  CHECK(term(Family::gaussian, ClassTag::vsE, 1, 1).value(Vec2::Zero()) == 1.0);
  CHECK(term(Family::gaussian, ClassTag::vsE, 1, 1).gradient(Vec2::Zero()).norm() == 0.0);
  CHECK(term(Family::power_tail, ClassTag::lE, 1, 1, 0.4).value(Vec2::Zero()) == 1.0);
  CHECK(term(Family::power_tail, ClassTag::lE, 1, 1, 0.4).value(Vec2(3, 4)) == doctest::Approx(std::pow(26.0, -0.2)));
  CHECK(term(Family::bump, ClassTag::vsE, 2, 3).value(Vec2::Zero()) == doctest::Approx(2.0));
  CHECK(term(Family::bump, ClassTag::vsE, 2, 3).value(Vec2(3, 0)) == 0.0);
  CHECK(term(Family::mollified_coulomb, ClassTag::sE, 1, 0.5).value(Vec2(0, 0)) == doctest::Approx(2.0));
}

TEST_CASE("property: gradients and Hessian diagonals match central differences") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-3, 3);
  const std::vector<PotentialTerm> terms{
      term(Family::gaussian, ClassTag::vsE, 0.7, 1.3, 1, Vec2(0.2, -0.1)),
      term(Family::bump, ClassTag::vsE, 1.0, 4.0, 1, Vec2(0.5, 0.0)),
      term(Family::power_tail, ClassTag::sE, -0.6, 0.8, 0.75),
      term(Family::mollified_coulomb, ClassTag::sE, 1.0, 0.3),
  };
  const double h = 1e-5;
  for (const auto& t : terms)
    for (int k = 0; k < 100; ++k) {
      const Vec2 x(u(rng), u(rng));
      const Vec2 g = t.gradient(x);
      Vec2 fd, fd2;
      for (int a = 0; a < 2; ++a) {
        Vec2 e = Vec2::Zero();
        e(a) = h;
        fd(a) = (t.value(x + e) - t.value(x - e)) / (2 * h);
        fd2(a) = (t.gradient(x + e)(a) - t.gradient(x - e)(a)) / (2 * h);
      }
      const double scale = std::max(g.norm(), 1e-3);
      CHECK((g - fd).norm() <= 1e-6 * scale);
      CHECK((t.hessian_diag(x) - fd2).norm() <= 1e-5 * std::max(fd2.norm(), 1e-3));
    }
}

TEST_CASE("validate_decay") {
  DecayParams p;
  p.gamma = p.alpha = 0.75;
  p.gammaD = 0.4;
  p.mu = 0.8;
  p.gamma1 = 1.6;
  p.eps0 = 0.05;
  const auto shells = geometric_shells(512);

  CHECK(validate_decay(term(Family::gaussian, ClassTag::vsE, 1, 1), p, shells).passed());
  CHECK(validate_decay(term(Family::power_tail, ClassTag::sE, 1, 1, 0.75), p, shells).passed());
  CHECK_FALSE(validate_decay(term(Family::power_tail, ClassTag::sE, 1, 1, 0.3), p, shells).passed());
  CHECK(validate_decay(term(Family::mollified_coulomb, ClassTag::sE, 1, 0.5), p, shells).passed());
  CHECK(validate_decay(term(Family::power_tail, ClassTag::lE, 1, 1, 0.4), p, shells).passed());
  CHECK_FALSE(validate_decay(term(Family::power_tail, ClassTag::lE, 1, 1, 0.2), p, shells).passed());
  CHECK_FALSE(validate_decay(term(Family::power_tail, ClassTag::l0, 1, 1, 0.3), p, shells).passed());
  CHECK(validate_decay(term(Family::power_tail, ClassTag::l0, 1, 1, 0.6), p, shells).passed());

  // smooth power tails differentiate to exponent beta + 1
  auto rep = validate_decay(term(Family::power_tail, ClassTag::lE, 1, 1, 0.4), p, {10, 100});
  for (const auto& r : rep.rows)
    if (r.bound.rfind("|grad V|", 0) == 0 && r.R == 100) CHECK(r.local_exponent == doctest::Approx(1.4).epsilon(0.05 / 1.4));
  CHECK(rep.constant("|grad V| <= C(1+R)^-(gammaD+mu)") > 0);

  // inadmissible parameters are rejected before sampling
  DecayParams bad = p;
  bad.gamma = bad.alpha = 0.4;
  try {
    validate_decay(term(Family::power_tail, ClassTag::sE, 1, 1, 0.75), bad, shells);
    FAIL("expected rejection");
  } catch (const Rejection& r) {
    CHECK(r.violations.front().bound == "1/2 < alpha <= gamma <= 1");
  }
}

TEST_CASE("split") {
  PairPotential v({term(Family::gaussian, ClassTag::vsE, 1, 1), term(Family::power_tail, ClassTag::sE, 0.5, 1, 0.75),
                   term(Family::power_tail, ClassTag::lE, 0.2, 2, 0.4)});
  auto s = split(v);
  CHECK(s.vs.terms().size() == 1);
  CHECK(s.s.terms().size() == 1);
  CHECK(s.l.terms().size() == 1);
  CHECK(split(PairPotential({term(Family::gaussian, ClassTag::vsE, 1, 1)})).s.empty());
  auto e = split(PairPotential());
  CHECK((e.vs.empty() && e.s.empty() && e.l.empty()));

  Grid2D g{64, 64, 16, 16};
  const RArray total = sample(v, g);
  const RArray resum = sample(s.vs, g) + sample(s.s, g) + sample(s.l, g);
  CHECK((total - resum).abs().maxCoeff() <= 1e-14);
  CHECK(sample(PairPotential(), g).abs().maxCoeff() == 0.0);
}

TEST_CASE("pair class consistency") {
  PairPotential v({term(Family::gaussian, ClassTag::vs0, 1, 1)});
  CHECK_NOTHROW(check_pair_classes(v, false));
  CHECK_THROWS_AS(check_pair_classes(v, true), ClassificationError);
}

TEST_CASE("weighted_vs_norm") {
  auto g = weighted_vs_norm(term(Family::gaussian, ClassTag::vsE, 1, 1), 1.0, 64);
  CHECK(g.verified);
  CHECK(g.value > 0);
  CHECK(std::pow(1 + 10.0, 1.0) * std::exp(-100.0) < 1e-12);

  auto a = weighted_vs_norm(term(Family::power_tail, ClassTag::vsE, 1, 1, 2.5), 1.0, 4096);
  CHECK(a.verified);
  CHECK(a.tail_slope == doctest::Approx(-1.5).epsilon(0.05));
  auto b = weighted_vs_norm(term(Family::power_tail, ClassTag::vsE, 1, 1, 1.5), 1.0, 4096);
  CHECK_FALSE(b.verified);
  CHECK(b.tail_slope == doctest::Approx(-0.5).epsilon(0.1));
  CHECK_THROWS_AS(weighted_vs_norm(term(Family::power_tail, ClassTag::sE, 1, 1, 2.5), 1.0, 64), ClassificationError);
}
