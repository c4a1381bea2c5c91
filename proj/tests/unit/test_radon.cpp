#include "doctest.h"
#include "hvscat/radon.hpp"

using namespace hvs;

namespace {

Sinogram gaussian_sinogram(int na, int ns, double ds, double amp = 1.0) {
  Sinogram s;
  s.theta = uniform_angles(na);
  s.s = uniform_offsets(ns, ds);
  s.values.resize(na, ns);
  for (int i = 0; i < na; ++i)
    for (int m = 0; m < ns; ++m) s.values(i, m) = amp * std::sqrt(M_PI) * std::exp(-s.s[m] * s.s[m]);
  return s;
}

}  // namespace

TEST_CASE("geometry helpers") {
  const auto t = uniform_angles(4);
  CHECK(t.front() == doctest::Approx(M_PI / 8));
  CHECK(t.back() == doctest::Approx(7 * M_PI / 8));
  const auto s = uniform_offsets(4, 0.5);
  CHECK(s.front() == doctest::Approx(-0.75));
  CHECK(s.back() == doctest::Approx(0.75));
  CHECK(direction(0.3).dot(normal(0.3)) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_THROWS_AS(uniform_angles(0), DomainError);
  CHECK_THROWS_AS(uniform_offsets(1, 0.1), DomainError);
}

TEST_CASE("phantom round trip") {
  const PhantomReport r = radon_selftest();
  CHECK(r.passed);
  CHECK(r.rel_l2 <= 0.02);
}

TEST_CASE("inversion is linear and maps zero to zero") {
  const Grid2D g{64, 64, 8, 8};
  const Sinogram a = gaussian_sinogram(60, 96, 0.125);
  Sinogram b = a;
  b.values *= cplx(2.0, -1.0);
  const CArray ia = radon_invert(a, g).image, ib = radon_invert(b, g).image;
  CHECK((ib - cplx(2.0, -1.0) * ia).abs().maxCoeff() <= 1e-12 * ia.abs().maxCoeff());
  Sinogram z = a;
  z.values.setZero();
  CHECK(radon_invert(z, g).image.abs().maxCoeff() == 0.0);
}

TEST_CASE("coarse sinograms warn, bad offsets throw") {
  const Grid2D g{64, 64, 8, 8};
  const Sinogram a = gaussian_sinogram(16, 40, 0.25);
  const FbpResult r = radon_invert(a, g);
  CHECK_FALSE(r.warnings.empty());
  Sinogram bad = a;
  bad.s[3] += 0.01;
  CHECK_THROWS_AS(radon_invert(bad, g), DomainError);
  Sinogram shape = a;
  shape.values.resize(3, 3);
  CHECK_THROWS_AS(radon_invert(shape, g), ShapeError);
}

TEST_CASE("assembly is independent of the worker count and propagates errors") {
  const auto th = uniform_angles(8);
  const auto s = uniform_offsets(10, 0.3);
  SinogramSampler f = [](double t, double x) {
    SinogramSample o;
    o.value = cplx(std::cos(t) * x, x * x);
    return o;
  };
  const Sinogram one = assemble_sinogram(th, s, f, 1), four = assemble_sinogram(th, s, f, 4);
  CHECK((one.values - four.values).abs().maxCoeff() == 0.0);
  CHECK(one.values(2, 7) == cplx(std::cos(th[2]) * s[7], s[7] * s[7]));
  SinogramSampler boom = [](double, double x) -> SinogramSample {
    if (x > 1) throw ToleranceError("boom");
    return {};
  };
  CHECK_THROWS_AS(assemble_sinogram(th, s, boom, 3), ToleranceError);
}
