#include "hvscat/rates.hpp"

#include <algorithm>
#include <cmath>

namespace hvs {

namespace {

bool neighbours(const PairRateInput& a, const PairRateInput& b) {
  return b.j == a.j || b.j == a.k || b.k == a.j || b.k == a.k || b.j + a.j == 3;
}

}  // namespace

std::string zeta_case(const RateScene& scene, const PairRateInput& p) {
  bool found = false;
  for (const auto& o : scene.pairs)
    if (!o.charged && o.has_long && neighbours(p, o)) found = true;
  if (!found) return "c";
  return scene.params.gamma1 < 2 ? "a" : "b";
}

RatePrediction predict_exponent(const RateScene& scene) {
  const DecayParams& dp = scene.params;
  const double m = scene.margin;
  RatePrediction r;
  r.margin = m;
  if (scene.pairs.empty()) throw DomainError("predict_exponent: scene has no pairs");
  if (!(m > 0)) throw DomainError("predict_exponent: margin must be positive");

  const PairRateInput* p12 = nullptr;
  double sum_q = 0;
  bool any_short = false, mixed = false;
  for (const auto& p : scene.pairs) {
    if (p.j == 1 && p.k == 2) p12 = &p;
    sum_q += p.charged ? 1 : 0;
    any_short = any_short || p.has_short;
  }
  if (!p12) throw DomainError("predict_exponent: the pair (1, 2) is missing");

  for (const auto& p : scene.pairs) {
    PairRate pr;
    pr.j = p.j;
    pr.k = p.k;
    pr.zeta = zeta_case(scene, p);
    pr.theta = pr.zeta == "a" ? 2 - dp.gamma1 : pr.zeta == "b" ? m : 0.0;
    if (p.charged && pr.zeta != "c") mixed = true;
    if (p.charged && p.has_long) {
      const double bound = 2 - std::max({(1 + pr.theta) / (dp.gammaD + dp.mu), 2 / (dp.gammaD + 2 * dp.mu), 1.0});
      pr.sigma_tilde = bound - m;
      if (!(pr.sigma_tilde > 0))
        r.violations.push_back({"pair " + std::to_string(p.j) + std::to_string(p.k),
                                "0 < sigma~ < 2 - max{(1+theta)/(gammaD+mu), 2/(gammaD+2mu), 1}",
                                "upper bound " + fmt_g(bound)});
      pr.sigma = pr.sigma_tilde / (2 - pr.sigma_tilde);
      if (!(pr.sigma > 0.5))
        r.violations.push_back({"pair " + std::to_string(p.j) + std::to_string(p.k), "sigma > 1/2",
                                "sigma = " + fmt_g(pr.sigma)});
    }
    r.pairs.push_back(pr);
  }
  if (mixed && !(dp.gamma1 > 3 - 4 * (dp.gammaD + dp.mu) / 3))
    r.violations.push_back({"scene", "gamma1 > 3 - 4(gammaD+mu)/3",
                            "gamma1 = " + fmt_g(dp.gamma1) + ", bound " + fmt_g(3 - 4 * (dp.gammaD + dp.mu) / 3)});

  // alpha only constrains short-range tails; with none, and with no charges, alpha = 1
  r.alpha = (any_short && sum_q > 0) ? dp.alpha : 1.0;
  r.sigma_min = 1;
  for (const auto& pr : r.pairs) r.sigma_min = std::min(r.sigma_min, pr.sigma);
  r.rho_cap = 2 * std::min(r.alpha, r.sigma_min) - 1;
  if (!(dp.rho >= 0)) r.violations.push_back({"scene", "0 <= rho", "rho = " + fmt_g(dp.rho)});
  r.rho = std::min(std::max(dp.rho, 0.0), r.rho_cap);

  if (!p12->has_long)
    r.gamma2 = 2;
  else
    r.gamma2 = p12->charged ? dp.gammaD + dp.mu : dp.gamma1;

  const double rho = r.rho, g2 = r.gamma2, cap = r.rho_cap;
  const double top = std::min({g2, 2 * r.alpha, 2 * r.sigma_min}) - 1;
  auto set = [&](int idx, const char* label, double e, bool open) {
    r.case_index = idx;
    r.case_label = label;
    r.exponent = e;
    r.open_bound = open;
  };
  if (rho == 1 && sum_q == 0 && !p12->has_long) {
    set(5, "O(v^-1)", 1, false);
  } else if (rho == 1 && sum_q == 0) {
    r.rho_l_bound = dp.gamma1 - 1;
    set(4, "o(v^-rho_l), rho_l < gamma1 - 1", dp.gamma1 - 1 - m, true);
  } else if (g2 - 1 <= rho && rho <= cap && cap < 1) {
    r.rho_l_bound = g2 - 1;
    set(1, "o(v^-rho_l), rho_l < gamma2 - 1", g2 - 1 - m, true);
  } else if (rho == cap && cap < g2 - 1) {
    set(3, "O(v^-rho)", rho, false);
  } else if (rho < top) {
    set(2, "o(v^-rho)", rho, false);
  } else {
    // the hypothesis with rho implies it with any smaller rho
    r.rho = top - m;
    set(2, "o(v^-rho)", r.rho, true);
  }

  if (sum_q == 0) {
    r.wave_case = "O(v^-1)";
    r.wave_exponent = 1;
  } else if (r.alpha < 1) {
    r.wave_case = "O(v^-alpha)";
    r.wave_exponent = r.alpha;
  } else {
    r.wave_case = "O(v^-(1-eps1))";
    r.wave_exponent = 1 - m;
  }

  r.has_graf = p12->has_short && p12->charged;
  if (r.has_graf) {
    if (dp.gamma < 1) {
      r.graf_case = "v^-(2gamma-1)";
      r.graf_exponent = 2 * dp.gamma - 1;
    } else {
      r.graf_case = "ln v / v";
      r.graf_exponent = 1;
    }
  }
  return r;
}

RateFit fit_rate(const std::vector<double>& v, const std::vector<double>& err) {
  if (v.size() != err.size()) throw ShapeError("fit_rate: size mismatch");
  if (v.size() < 4) throw DomainError("fit_rate: needs at least 4 points");
  const std::size_t n = v.size();
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(v[i] > 0) || !(err[i] > 0)) throw DomainError("fit_rate: velocities and errors must be positive");
    A(i, 0) = 1;
    A(i, 1) = std::log(v[i]);
    b(i) = std::log(err[i]);
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd res = b - A * c;
  const double s2 = res.squaredNorm() / double(n - 2);
  const Eigen::Matrix2d cov = s2 * (A.transpose() * A).inverse();
  RateFit f;
  f.exponent = -c(1);
  f.half_width = 2 * std::sqrt(std::max(cov(1, 1), 0.0));
  f.prefactor = std::exp(c(0));
  f.residual = std::sqrt(res.squaredNorm() / double(n));
  return f;
}

}  // namespace hvs
