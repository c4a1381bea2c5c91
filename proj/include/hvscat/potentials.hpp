#ifndef HVSCAT_POTENTIALS_HPP
#define HVSCAT_POTENTIALS_HPP

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hvscat/errors.hpp"

namespace hvs {

using Vec2 = Eigen::Vector2d;

enum class ClassTag { vs0, l0, vsE, sE, lE };
enum class Family { gaussian, bump, power_tail, mollified_coulomb };
enum class Bucket { vs, s, l };

std::string to_string(ClassTag c);
std::string to_string(Family f);
ClassTag parse_class_tag(const std::string& s);
Family parse_family(const std::string& s);

inline bool charged_class(ClassTag c) { return c == ClassTag::vsE || c == ClassTag::sE || c == ClassTag::lE; }
Bucket bucket_of(ClassTag c);

struct DecayParams {
  double gamma1 = 2.0;
  double eps0 = 0.25;
  double gamma = 1.0;
  double alpha = 1.0;
  double gammaD = 0.5;
  double mu = 1.0;
  double rho = 1.0;

  /// Violations of the admissible ranges relevant to `cls`.
  std::vector<Violation> check(ClassTag cls) const;
};

/*!
 * One analytic term, radial about `center`:
 *   gaussian           A exp(-r^2/w^2)
 *   bump               A exp(1 - 1/(1 - r^2/w^2)) for r < w, else 0
 *   power_tail         A (1 + r^2/w^2)^(-beta/2), beta = exponent
 *   mollified_coulomb  A / sqrt(r^2 + w^2)
 */
struct PotentialTerm {
  ClassTag cls = ClassTag::vsE;
  Family family = Family::gaussian;
  double amplitude = 1.0;
  double width = 1.0;
  double exponent = 1.0;
  Vec2 center = Vec2::Zero();

  double value(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;
  Vec2 hessian_diag(const Vec2& x) const;
  Eigen::Matrix2d hessian(const Vec2& x) const;

  /// Radial profile g(u), g'(u), g''(u) with u = r^2.
  void profile(double u, double& g, double& g1, double& g2) const;
  /// Value as a function of distance from the center (all families decrease in r).
  double radial(double r) const;
  /// Distance from the center beyond which |V| <= eps.
  double negligible_radius(double eps) const;
  /// Asymptotic decay exponent of |V|; infinity for gaussian and bump.
  double decay_exponent() const;
};

class PairPotential {
 public:
  PairPotential() = default;
  explicit PairPotential(std::vector<PotentialTerm> terms) : terms_(std::move(terms)) {}

  const std::vector<PotentialTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  void add(const PotentialTerm& t) { terms_.push_back(t); }

  double value(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;
  Eigen::Matrix2d hessian(const Vec2& x) const;
  /// Largest |V| on the shell family |x| >= R, from the radial profiles.
  double sup_beyond(double R) const;
  double max_abs() const { return sup_beyond(0.0); }
  /// Smallest exponent of algebraic decay among terms (infinity if none).
  double slowest_decay() const;

  PairPotential bucket(Bucket b) const;
  /// Same terms evaluated at x + y.
  PairPotential shifted(const Vec2& y) const;
  PairPotential operator+(const PairPotential& o) const;

 private:
  std::vector<PotentialTerm> terms_;
};

struct PotentialSplit {
  PairPotential vs, s, l;
  PairPotential total() const { return vs + s + l; }
};

PotentialSplit split(const PairPotential& v);

/// Throws ClassificationError if any term's class disagrees with the pair's charge.
void check_pair_classes(const PairPotential& v, bool charged);

struct DecayBoundRow {
  std::string bound;      // e.g. "|grad V| <= C(1+R)^-(1+alpha)"
  double R = 0;
  double sup = 0;         // largest sampled value on the shell
  double C = 0;           // sup * (1+R)^required
  double local_exponent = 0;  // -dlog(sup)/dlog(1+R) between this shell and the previous one
  double required = 0;
  bool admissible = true;
};

struct DecayReport {
  std::vector<DecayBoundRow> rows;
  std::vector<std::string> flags;
  bool passed() const { return flags.empty(); }
  /// Largest C over shells for the named bound.
  double constant(const std::string& bound) const;
};

/// Samples the class bounds on shells |x| = R (16 directions each).
DecayReport validate_decay(const PotentialTerm& term, const DecayParams& params, const std::vector<double>& radii);
std::vector<double> geometric_shells(double r_max);

struct WeightedNorm {
  double value = 0;
  double tail_slope = 0;  // log-slope of the integrand at R_max
  bool verified = true;
};

WeightedNorm weighted_vs_norm(const PotentialTerm& term, double rho, double r_max);

}  // namespace hvs

#endif
