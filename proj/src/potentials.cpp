#include "hvscat/potentials.hpp"

#include <algorithm>
#include <cmath>

#include "hvscat/quadrature.hpp"

namespace hvs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(ClassTag c) {
  switch (c) {
    case ClassTag::vs0: return "vs0";
    case ClassTag::l0: return "l0";
    case ClassTag::vsE: return "vsE";
    case ClassTag::sE: return "sE";
    case ClassTag::lE: return "lE";
  }
  return "?";
}

std::string to_string(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::bump: return "bump";
    case Family::power_tail: return "power_tail";
    case Family::mollified_coulomb: return "mollified_coulomb";
  }
  return "?";
}

ClassTag parse_class_tag(const std::string& s) {
  for (auto c : {ClassTag::vs0, ClassTag::l0, ClassTag::vsE, ClassTag::sE, ClassTag::lE})
    if (to_string(c) == s) return c;
  throw ClassificationError("unknown class tag '" + s + "'");
}

Family parse_family(const std::string& s) {
  for (auto f : {Family::gaussian, Family::bump, Family::power_tail, Family::mollified_coulomb})
    if (to_string(f) == s) return f;
  throw ClassificationError("unknown family '" + s + "'");
}

Bucket bucket_of(ClassTag c) {
  switch (c) {
    case ClassTag::vs0:
    case ClassTag::vsE: return Bucket::vs;
    case ClassTag::sE: return Bucket::s;
    default: return Bucket::l;
  }
}

std::vector<Violation> DecayParams::check(ClassTag cls) const {
  std::vector<Violation> bad;
  const std::string who = to_string(cls);
  switch (cls) {
    case ClassTag::l0:
      if (!(gamma1 > 1.5 && gamma1 <= 2)) bad.push_back({who, "3/2 < gamma1 <= 2", ""});
      if (!(eps0 > 0 && eps0 < gamma1 - 1.5)) bad.push_back({who, "0 < eps0 < gamma1 - 3/2", ""});
      break;
    case ClassTag::sE:
      if (!(alpha > 0.5 && alpha <= gamma && gamma <= 1)) bad.push_back({who, "1/2 < alpha <= gamma <= 1", ""});
      break;
    case ClassTag::lE:
      if (!(gammaD > 0 && gammaD <= 0.5)) bad.push_back({who, "0 < gammaD <= 1/2", ""});
      if (!(mu > 1 - gammaD && mu <= 1)) bad.push_back({who, "1 - gammaD < mu <= 1", ""});
      break;
    case ClassTag::vs0:
    case ClassTag::vsE:
      if (!(rho >= 0 && rho <= 1)) bad.push_back({who, "0 <= rho <= 1", ""});
      break;
  }
  return bad;
}

void PotentialTerm::profile(double u, double& g, double& g1, double& g2) const {
  const double A = amplitude, w = width;
  switch (family) {
    case Family::gaussian: {
      const double w2 = w * w;
      g = A * std::exp(-u / w2);
      g1 = -g / w2;
      g2 = g / (w2 * w2);
      return;
    }
    case Family::bump: {
      const double z = u / (w * w);
      if (z >= 1) {
        g = g1 = g2 = 0;
        return;
      }
      const double a = 1.0 / (1.0 - z);
      g = A * std::exp(1.0 - a);
      // d/dz exp(1-a) = -a^2 exp(1-a); second derivative (a^4 - 2a^3) exp(1-a)
      const double s = 1.0 / (w * w);
      g1 = -a * a * g * s;
      g2 = (a * a * a * a - 2 * a * a * a) * g * s * s;
      return;
    }
    case Family::power_tail: {
      const double s = 1.0 / (w * w);
      const double b = 1.0 + u * s;
      const double h = -0.5 * exponent;
      g = A * std::pow(b, h);
      g1 = h * g / b * s;
      g2 = h * (h - 1) * g / (b * b) * s * s;
      return;
    }
    case Family::mollified_coulomb: {
      const double b = u + w * w;
      g = A / std::sqrt(b);
      g1 = -0.5 * g / b;
      g2 = 0.75 * g / (b * b);
      return;
    }
  }
}

double PotentialTerm::value(const Vec2& x) const {
  double g, g1, g2;
  profile((x - center).squaredNorm(), g, g1, g2);
  return g;
}

Vec2 PotentialTerm::gradient(const Vec2& x) const {
  const Vec2 d = x - center;
  double g, g1, g2;
  profile(d.squaredNorm(), g, g1, g2);
  return 2 * g1 * d;
}

Vec2 PotentialTerm::hessian_diag(const Vec2& x) const {
  const Vec2 d = x - center;
  double g, g1, g2;
  profile(d.squaredNorm(), g, g1, g2);
  return (4 * g2 * d.array().square() + 2 * g1).matrix();
}

Eigen::Matrix2d PotentialTerm::hessian(const Vec2& x) const {
  const Vec2 d = x - center;
  double g, g1, g2;
  profile(d.squaredNorm(), g, g1, g2);
  return 4 * g2 * d * d.transpose() + 2 * g1 * Eigen::Matrix2d::Identity();
}

double PotentialTerm::radial(double r) const {
  double g, g1, g2;
  profile(r * r, g, g1, g2);
  return g;
}

double PotentialTerm::negligible_radius(double eps) const {
  const double A = std::abs(amplitude), w = width;
  if (A <= eps) return 0.0;
  switch (family) {
    case Family::gaussian: return w * std::sqrt(std::log(A / eps));
    case Family::bump: return w;
    case Family::power_tail: return w * std::sqrt(std::max(0.0, std::pow(A / eps, 2.0 / exponent) - 1.0));
    case Family::mollified_coulomb: return std::sqrt(std::max(0.0, A * A / (eps * eps) - w * w));
  }
  return kInf;
}

double PotentialTerm::decay_exponent() const {
  switch (family) {
    case Family::power_tail: return exponent;
    case Family::mollified_coulomb: return 1.0;
    default: return kInf;
  }
}

double PairPotential::value(const Vec2& x) const {
  double s = 0;
  for (const auto& t : terms_) s += t.value(x);
  return s;
}

Vec2 PairPotential::gradient(const Vec2& x) const {
  Vec2 s = Vec2::Zero();
  for (const auto& t : terms_) s += t.gradient(x);
  return s;
}

Eigen::Matrix2d PairPotential::hessian(const Vec2& x) const {
  Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
  for (const auto& t : terms_) s += t.hessian(x);
  return s;
}

double PairPotential::sup_beyond(double R) const {
  double s = 0;
  for (const auto& t : terms_) s += std::abs(t.radial(std::max(0.0, R - t.center.norm())));
  return s;
}

double PairPotential::slowest_decay() const {
  double b = kInf;
  for (const auto& t : terms_) b = std::min(b, t.decay_exponent());
  return b;
}

PairPotential PairPotential::bucket(Bucket b) const {
  PairPotential out;
  for (const auto& t : terms_)
    if (bucket_of(t.cls) == b) out.add(t);
  return out;
}

PairPotential PairPotential::shifted(const Vec2& y) const {
  PairPotential out = *this;
  for (auto& t : out.terms_) t.center -= y;
  return out;
}

PairPotential PairPotential::operator+(const PairPotential& o) const {
  PairPotential out = *this;
  for (const auto& t : o.terms_) out.add(t);
  return out;
}

PotentialSplit split(const PairPotential& v) {
  return {v.bucket(Bucket::vs), v.bucket(Bucket::s), v.bucket(Bucket::l)};
}

void check_pair_classes(const PairPotential& v, bool charged) {
  for (const auto& t : v.terms())
    if (charged_class(t.cls) != charged)
      throw ClassificationError("class " + to_string(t.cls) + " on a " + (charged ? "charged" : "neutral") + " pair");
}

double DecayReport::constant(const std::string& bound) const {
  double c = 0;
  for (const auto& r : rows)
    if (r.bound == bound) c = std::max(c, r.C);
  return c;
}

std::vector<double> geometric_shells(double r_max) {
  std::vector<double> r;
  for (double R = 1; R <= r_max * (1 + 1e-12); R *= 2) r.push_back(R);
  return r;
}

DecayReport validate_decay(const PotentialTerm& term, const DecayParams& params, const std::vector<double>& radii) {
  {
    auto bad = params.check(term.cls);
    if (!bad.empty()) throw Rejection(bad);
  }
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (!(radii[i] > 0) || (i && radii[i] <= radii[i - 1]))
      throw DomainError("validate_decay: radii must be positive and increasing");

  struct Bound {
    std::string name;
    int order;  // 0 value, 1 gradient, 2 second derivatives
    double exponent;
  };
  std::vector<Bound> bounds;
  switch (term.cls) {
    case ClassTag::vs0:
    case ClassTag::vsE:
      // shell-sup integrability stands in for the resolvent condition
      bounds.push_back({"|V| <= C(1+R)^-(1+rho)", 0, 1.0 + params.rho});
      break;
    case ClassTag::sE:
      bounds.push_back({"|V| <= C(1+R)^-gamma", 0, params.gamma});
      bounds.push_back({"|grad V| <= C(1+R)^-(1+alpha)", 1, 1.0 + params.alpha});
      break;
    case ClassTag::lE:
      bounds.push_back({"|V| <= C(1+R)^-gammaD", 0, params.gammaD});
      bounds.push_back({"|grad V| <= C(1+R)^-(gammaD+mu)", 1, params.gammaD + params.mu});
      bounds.push_back({"|D2 V| <= C(1+R)^-(gammaD+2mu)", 2, params.gammaD + 2 * params.mu});
      break;
    case ClassTag::l0:
      bounds.push_back({"|grad V| <= C(1+R)^-gamma1", 1, params.gamma1});
      bounds.push_back({"|D2 V| <= C(1+R)^-(2+2eps0)", 2, 2.0 + 2.0 * params.eps0});
      break;
  }

  constexpr int kDirs = 16;
  constexpr double kSlack = 0.02;  // allowed shortfall of the local exponent
  DecayReport rep;
  for (const auto& b : bounds) {
    double prev_sup = 0, prev_R = 0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const double R = radii[i];
      double sup = 0;
      for (int d = 0; d < kDirs; ++d) {
        const double a = 2 * M_PI * d / kDirs;
        const Vec2 x = term.center + R * Vec2(std::cos(a), std::sin(a));
        double q = 0;
        if (b.order == 0) q = std::abs(term.value(x));
        else if (b.order == 1) q = term.gradient(x).norm();
        else q = term.hessian_diag(x).cwiseAbs().maxCoeff();
        sup = std::max(sup, q);
      }
      DecayBoundRow row;
      row.bound = b.name;
      row.R = R;
      row.sup = sup;
      row.required = b.exponent;
      row.C = sup * std::pow(1 + R, b.exponent);
      if (i == 0) {
        row.local_exponent = std::numeric_limits<double>::quiet_NaN();
      } else if (sup == 0 || prev_sup == 0) {
        row.local_exponent = kInf;
      } else {
        row.local_exponent = -std::log(sup / prev_sup) / std::log((1 + R) / (1 + prev_R));
        row.admissible = row.local_exponent >= b.exponent - kSlack;
      }
      // below double resolution the shape no longer matters
      if (sup < 1e-300) row.admissible = true;
      if (!row.admissible && i + 1 == radii.size())
        rep.flags.push_back(b.name + ": local exponent " + std::to_string(row.local_exponent) + " at R=" +
                            std::to_string(R));
      rep.rows.push_back(row);
      prev_sup = sup;
      prev_R = R;
    }
  }
  return rep;
}

WeightedNorm weighted_vs_norm(const PotentialTerm& term, double rho, double r_max) {
  if (!(rho >= 0 && rho <= 1)) throw DomainError("weighted_vs_norm: 0 <= rho <= 1");
  if (bucket_of(term.cls) != Bucket::vs) throw ClassificationError("weighted_vs_norm needs a very-short-range term");
  const double c = term.center.norm();
  auto integrand = [&](double R) { return std::pow(1 + R, rho) * std::abs(term.radial(std::max(0.0, R - c))); };
  std::vector<double> pts{0.0};
  for (double R = std::max(term.width, 0.5); R < r_max; R *= 2) pts.push_back(R);
  if (c > 0 && c < r_max) pts.push_back(c);
  if (term.family == Family::bump && c + term.width < r_max) pts.push_back(c + term.width);
  pts.push_back(r_max);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  WeightedNorm out;
  out.value = integrate_pieces(integrand, pts, {1e-10, 24, "weighted_vs_norm"}).value;
  const double f1 = integrand(r_max), f0 = integrand(0.5 * r_max);
  if (f1 <= 1e-12 * std::max(1.0, out.value)) {
    out.tail_slope = -kInf;
    out.verified = true;
  } else {
    out.tail_slope = std::log(f1 / f0) / std::log(2.0);
    out.verified = out.tail_slope < -1.0;
  }
  return out;
}

}  // namespace hvs
