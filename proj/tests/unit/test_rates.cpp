#include <random>

#include "doctest.h"
#include "hvscat/rates.hpp"

using namespace hvs;

namespace {

RateScene two_body(bool charged, bool shrt, bool lng) {
  RateScene s;
  s.pairs = {{1, 2, charged, shrt, lng}};
  return s;
}

}  // namespace

TEST_CASE("zero charge, no long range, rho = 1: O(v^-1)") {
  RateScene s = two_body(false, false, false);
  s.params.rho = 1;
  const auto r = predict_exponent(s);
  CHECK(r.admissible());
  CHECK(r.case_index == 5);
  CHECK(r.exponent == 1.0);
  CHECK_FALSE(r.open_bound);
  CHECK(r.wave_exponent == 1.0);
  CHECK_FALSE(r.has_graf);
}

TEST_CASE("short range only, alpha < 1, charged: wave-operator rate alpha") {
  RateScene s = two_body(true, true, false);
  s.params.gamma = s.params.alpha = 0.75;
  const auto r = predict_exponent(s);
  CHECK(r.wave_case == "O(v^-alpha)");
  CHECK(r.wave_exponent == 0.75);
  // rho is capped at 2 alpha - 1 = 0.5 < gamma2 - 1 = 1
  CHECK(r.rho == doctest::Approx(0.5));
  CHECK(r.case_index == 3);
  CHECK(r.exponent == doctest::Approx(0.5));
  CHECK(r.has_graf);
  CHECK(r.graf_exponent == doctest::Approx(0.5));
}

TEST_CASE("charged long range without zero-charge neighbours: sigma from the open bound") {
  RateScene s = two_body(true, false, true);
  s.params.gammaD = 0.4;
  s.params.mu = 0.8;
  const auto r = predict_exponent(s);
  REQUIRE(r.pairs.size() == 1);
  CHECK(r.pairs[0].zeta == "c");
  CHECK(r.pairs[0].theta == 0.0);
  // 2 - max{1/1.2, 2/2.0, 1} = 1
  CHECK(r.pairs[0].sigma_tilde == doctest::Approx(1 - 0.01));
  CHECK(r.pairs[0].sigma == doctest::Approx(0.99 / 1.01));
  CHECK(r.gamma2 == doctest::Approx(1.2));
  CHECK(r.admissible());
}

TEST_CASE("zeta cases follow the neighbour conditions") {
  RateScene s;
  s.params.gamma1 = 1.6;
  s.pairs = {{1, 2, true, false, true}, {1, 3, false, false, true}, {2, 3, true, false, false}};
  CHECK(zeta_case(s, s.pairs[0]) == "a");
  CHECK(zeta_case(s, s.pairs[2]) == "a");  // shares particle 3 with pair 13
  RateScene far;
  far.params.gamma1 = 1.6;
  far.pairs = {{1, 2, true, false, true}, {3, 4, false, false, true}};
  CHECK(zeta_case(far, far.pairs[0]) == "c");
  far.pairs[1] = {2, 4, false, false, true};
  CHECK(zeta_case(far, far.pairs[0]) == "a");
  // j' + j = 3 links (1, .) with (2, .)
  far.pairs = {{1, 3, true, false, false}, {2, 4, false, false, true}};
  CHECK(zeta_case(far, far.pairs[0]) == "a");
  far.params.gamma1 = 2;
  CHECK(zeta_case(far, far.pairs[0]) == "b");
  const auto r = predict_exponent(RateScene{{{1, 2, true, false, true}, {1, 3, false, false, true}}, far.params});
  CHECK(r.pairs[0].theta == doctest::Approx(0.01));
}

TEST_CASE("hypothesis violations are reported by inequality") {
  RateScene s;
  s.params.gamma1 = 1.1;
  s.params.gammaD = 0.3;
  s.params.mu = 0.3;
  s.pairs = {{1, 2, true, false, true}, {1, 3, false, false, true}};
  const auto r = predict_exponent(s);
  CHECK_FALSE(r.admissible());
  bool saw = false;
  for (const auto& v : r.violations) saw = saw || v.bound == "gamma1 > 3 - 4(gammaD+mu)/3";
  CHECK(saw);
}

TEST_CASE("property: predicted exponent is monotone in rho up to the margin") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 200; ++k) {
    RateScene s = two_body(u(rng) < 0.5, u(rng) < 0.5, u(rng) < 0.5);
    s.params.alpha = 0.55 + 0.45 * u(rng);
    s.params.gamma = std::max(s.params.alpha, 0.55 + 0.45 * u(rng));
    s.params.gammaD = 0.3 + 0.5 * u(rng);
    s.params.mu = 0.3 + 0.7 * u(rng);
    s.params.gamma1 = 1 + u(rng);
    double prev = -1;
    for (double rho = 0; rho <= 1.0001; rho += 0.05) {
      s.params.rho = std::min(rho, 1.0);
      const double e = predict_exponent(s).exponent;
      CHECK(e >= prev - s.margin - 1e-12);
      prev = std::max(prev, e);
    }
  }
}

TEST_CASE("zero-charge short-range scenes have wave-operator rate exactly 1") {
  for (bool lng : {false, true}) {
    const auto r = predict_exponent(two_body(false, false, lng));
    CHECK(r.wave_exponent == 1.0);
  }
}

TEST_CASE("fit_rate") {
  const std::vector<double> v{4, 8, 16, 32, 64, 128};
  std::vector<double> e;
  for (double x : v) e.push_back(3.0 / x);
  auto f = fit_rate(v, e);
  CHECK(f.exponent == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.half_width <= 1e-10);
  CHECK(f.prefactor == doctest::Approx(3.0));

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> noise(-1, 1);
  e.clear();
  for (double x : v) e.push_back(std::pow(x, -0.5) * (1 + 0.05 * noise(rng)));
  f = fit_rate(v, e);
  CHECK(std::abs(f.exponent - 0.5) <= 0.1);

  e.assign(v.size(), 0.2);
  CHECK(std::abs(fit_rate(v, e).exponent) <= 1e-12);

  e[2] = 0;
  CHECK_THROWS_AS(fit_rate(v, e), DomainError);
  CHECK_THROWS_AS(fit_rate({1, 2, 3}, {1, 1, 1}), DomainError);
}
