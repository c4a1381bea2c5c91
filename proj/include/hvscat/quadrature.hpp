#ifndef HVSCAT_QUADRATURE_HPP
#define HVSCAT_QUADRATURE_HPP

// Boost's Gauss-Kronrod rule under a global adaptive loop with an absolute
// tolerance, and an algebraic map for slowly decaying half-line integrands.

#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hvscat/errors.hpp"

namespace hvs {

template <class T>
struct QuadResult {
  T value{};
  double error = 0;
};

struct QuadOptions {
  double abs_tol = 1e-10;
  unsigned max_intervals = 4000;
  const char* what = "quadrature";
};

/*!
 * Integral over [a, b] by globally adaptive GK15: the interval with the largest
 * error estimate is bisected until the summed estimate meets abs_tol.
 * Throws ToleranceError if the interval budget runs out first.
 */
template <class F>
auto integrate(F&& f, double a, double b, const QuadOptions& opt = {}) {
  using T = decltype(f(a));
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  QuadResult<T> r;
  if (a == b) return r;
  struct Piece {
    double a, b;
    T v;
    double e;
    bool operator<(const Piece& o) const { return e < o.e; }
  };
  auto eval = [&](double lo, double hi) {
    Piece p{lo, hi, T{}, 0.0};
    p.v = GK::integrate(f, lo, hi, 0, 0.0, &p.e);
    return p;
  };
  std::priority_queue<Piece> q;
  q.push(eval(a, b));
  double err = q.top().e;
  while (!(err <= opt.abs_tol) && q.size() < opt.max_intervals) {
    const Piece p = q.top();
    q.pop();
    const double m = 0.5 * (p.a + p.b);
    if (!(m > std::min(p.a, p.b) && m < std::max(p.a, p.b))) {
      q.push(p);
      break;
    }
    const Piece l = eval(p.a, m), h = eval(m, p.b);
    err += l.e + h.e - p.e;
    q.push(l);
    q.push(h);
  }
  err = 0;
  while (!q.empty()) {
    r.value += q.top().v;
    err += q.top().e;
    q.pop();
  }
  r.error = err;
  if (!(r.error <= opt.abs_tol))
    throw ToleranceError(std::string(opt.what) + ": error estimate " + fmt_g(r.error) + " above " +
                         fmt_g(opt.abs_tol));
  return r;
}

/// Integral over consecutive pieces of a sorted breakpoint list.
template <class F>
auto integrate_pieces(F&& f, const std::vector<double>& pts, const QuadOptions& opt = {}) {
  using T = decltype(f(pts.front()));
  QuadResult<T> r;
  QuadOptions sub = opt;
  sub.abs_tol = opt.abs_tol / std::max<std::size_t>(1, pts.size() - 1);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    auto p = integrate(f, pts[i], pts[i + 1], sub);
    r.value += p.value;
    r.error += p.error;
  }
  return r;
}

/*!
 * Integral over [a, inf) for |f(s)| ~ s^-beta (beta > 1; infinity for fast decay),
 * using s = a + ell (u^-k - 1), k = 1/(beta-1) for beta < 2, so the mapped
 * integrand stays bounded at u = 0.
 */
template <class F>
auto integrate_to_infinity(F&& f, double a, double beta, double ell, const QuadOptions& opt = {}) {
  if (!(beta > 1)) throw DomainError("integrate_to_infinity: tail exponent must exceed 1");
  const double k = beta < 2 ? 1.0 / (beta - 1.0) : 1.0;
  auto g = [&](double u) {
    const double uk = std::pow(u, -k);
    const double s = a + ell * (uk - 1.0);
    return f(s) * (ell * k * uk / u);
  };
  return integrate(g, 0.0, 1.0, opt);
}

}  // namespace hvs

#endif
