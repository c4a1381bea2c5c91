#ifndef HVSCAT_PROPAGATOR_HPP
#define HVSCAT_PROPAGATOR_HPP

#include <limits>
#include <vector>

#include "hvscat/grid.hpp"
#include "hvscat/potentials.hpp"

namespace hvs {

/// Pair in the field -E e1: relative force +qE e1.
struct StarkParams {
  double mu = 0.5;
  double q = 1.0;
  double E = 1.0;

  double force() const { return q * E; }
  /// a in X(t) = v t + e1 a t^2.
  double half_accel() const { return q * E / (2 * mu); }
  Vec2 trajectory(const Vec2& v, double t) const { return v * t + Vec2(half_accel() * t * t, 0); }
  void validate() const;
};

enum class Gauge { lab, comoving };

struct EvolutionPlan {
  double dt = 1e-3;
  double T = 1.0;
  Gauge gauge = Gauge::comoving;
  Vec2 v = Vec2::Zero();
  /// Steps grow like dt |t|/t_core beyond t_core, capped at dt_max.
  double t_core = std::numeric_limits<double>::infinity();
  double dt_max = std::numeric_limits<double>::infinity();
  /// Potential steps are skipped while |V| stays below this on the whole grid.
  double skip_eps = 1e-16;
  /// When positive, the relative mass within this strip of the boundary is
  /// checked at every potential step and must stay below margin_tol.
  double margin = 0;
  double margin_tol = 1e-10;

  void validate() const;
};

/// Default step: min(0.1 mu dx^2/pi, 0.05/Vmax).
double default_dt(const Grid2D& g, const StarkParams& sp, double vmax);

/// exp(-i t H0) by the four exact factors; lab gauge only.
Field2D free_evolve_exact(const Field2D& f, double t, const StarkParams& sp, double margin = -1);

/// Time nodes from t0 to t1 (either order), symmetric about t = 0 when graded.
std::vector<double> time_nodes(double t0, double t1, const EvolutionPlan& plan);

/// One Strang step of i d/dt phi = [p^2/2mu + V(x + X(t) + shift)] phi.
Field2D comoving_step(const Field2D& f, double t, double dt, const PairPotential& V, const StarkParams& sp,
                      const Vec2& v, const Vec2& shift = Vec2::Zero());

struct EvolveStats {
  long steps = 0;
  long potential_steps = 0;
  double first_active = 0, last_active = 0;  // midpoints of the first and last potential steps
  double boundary_mass = 0;                   // largest relative value seen when checking
};

/// Upper bound of |V(x + s)| over the grid box.
double grid_sup(const PairPotential& V, const Grid2D& g, const Vec2& s);

/*!
 * Evolves every field from t0 to t1 with shared potential phases.
 * Comoving gauge: H = p^2/2mu + V(x + X(t) + shift), X from plan.v.
 * Lab gauge: H = p^2/2mu - qE x1 + V(x + shift).
 * Consecutive kinetic half steps are merged; steps where the potential is
 * negligible on the grid reduce to exact free motion.
 */
EvolveStats evolve(const std::vector<Field2D*>& fields, double t0, double t1, const EvolutionPlan& plan,
                   const PairPotential& V, const StarkParams& sp, const Vec2& shift = Vec2::Zero());

Field2D evolve(const Field2D& f, double t0, double t1, const EvolutionPlan& plan, const PairPotential& V,
               const StarkParams& sp);

/// Lab state G(t) phi of a comoving state: exp(i beta) exp(i P.x) phi(x - X(t)).
Field2D comoving_to_lab(const Field2D& phi, double t, const StarkParams& sp, const Vec2& v);

}  // namespace hvs

#endif
