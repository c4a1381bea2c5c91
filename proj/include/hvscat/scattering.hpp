#ifndef HVSCAT_SCATTERING_HPP
#define HVSCAT_SCATTERING_HPP

#include <string>
#include <vector>

#include "hvscat/grid.hpp"
#include "hvscat/potentials.hpp"
#include "hvscat/propagator.hpp"

namespace hvs {

/// The simulated pair: Stark parameters plus its split potential.
struct Scene {
  StarkParams sp;
  PotentialSplit V;
};

/*!
 * Theta(p, t) = int_0^t V^l(s p/mu + e1 a s^2) ds on the momentum lattice.
 * Each lattice point is integrated adaptively to the absolute tolerance.
 */
class DollardModifier {
 public:
  DollardModifier(PairPotential Vl, StarkParams sp, double tol = 1e-10) : Vl_(std::move(Vl)), sp_(sp), tol_(tol) {}

  bool trivial() const { return Vl_.empty(); }
  double theta(const Vec2& p, double t) const;
  /// Theta(p + offset, t) for every lattice momentum p of g (row-major ny-by-nx).
  RArray phase(const Grid2D& g, double t, const Vec2& offset = Vec2::Zero()) const;

 private:
  PairPotential Vl_;
  StarkParams sp_;
  double tol_;
};

/// exp(-i int_a^b V^s(v s + e1 a s^2 + shift) ds); a, b may be infinite.
cplx graf_integral(double a, double b, const Vec2& v, const StarkParams& sp, const PairPotential& Vs,
                   const Vec2& shift = Vec2::Zero(), double tol = 1e-10);
/// Full-line Graf phase I_{G,v}.
inline cplx graf_phase(const Vec2& v, const StarkParams& sp, const PairPotential& Vs) {
  const double inf = std::numeric_limits<double>::infinity();
  return graf_integral(-inf, inf, v, sp, Vs);
}

struct SandwichOptions {
  double T0 = 0;          // 0 picks a start from the potential and packet extents
  double T_max = 64;      // doubling also stops where the free packets would reach the margin
  double tol = 1e-4;      // relative Cauchy tolerance
  bool dollard = true;    // false: plain sandwich, Theta = 0
  bool graf_tail = true;  // scalar phase for the sE tail beyond |t| = T
  int min_doublings = 1;
  int max_doublings = 8;  // beyond the first run
  bool record_all = false;  // keep doubling until T_max even once converged
  double packet_radius = 4;
  /// Scattered waves may approach the boundary; their relative mass in the
  /// margin strip must stay below this. The free packets themselves are held to 1e-10.
  double margin_tol = 1e-6;
};

struct CauchyStep {
  double T = 0;
  double diff = 0;
};

struct ScatterRun {
  std::vector<Field2D> out;   // S' applied to each input (comoving frame)
  double T = 0;
  double T_cap = 0;  // largest T the free packets allow on this grid
  std::vector<CauchyStep> cauchy;
  bool converged = false;
  double norm_in = 0, norm_out = 0;
  double wall_seconds = 0;
  long steps = 0;
  double boundary_mass = 0;  // largest relative margin mass during the interacting runs
  std::string stop_reason;   // why doubling ended early, if it did
  double cauchy_diff() const { return cauchy.empty() ? 0.0 : cauchy.back().diff; }
};

/*!
 * Comoving-frame sandwich S' with G0 S' G0^-1 = S^D, G0 = exp(i mu v.x):
 *   S' = U'(T)^* e^{iTK} U_com(T,-T) e^{iTK} U'(-T),  U'(t) = exp(-i Theta(p + mu v, t)).
 * A translation y of the states enters as the potential shift V(. + y).
 * T doubles until successive results agree to opt.tol.
 */
ScatterRun apply_sandwich(const std::vector<Field2D>& phi0, const Scene& scene, const Vec2& v, const Vec2& y,
                          const EvolutionPlan& plan, const SandwichOptions& opt);

/// Lab-frame S^D psi for a boosted state psi = G0 phi0 with the velocity v.
ScatterRun apply_sd(const Field2D& psi, const Scene& scene, const Vec2& v, const EvolutionPlan& plan,
                    const SandwichOptions& opt);

struct CommutatorResult {
  cplx value;
  ScatterRun run;
};

/// v i [(S^D (p_l Phi0)_v^y, Psi_v^y) - (S^D Phi_v^y, (p_l Psi0)_v^y)], v = speed * vhat.
CommutatorResult commutator_element(const Field2D& Phi0, const Field2D& Psi0, double speed, const Vec2& vhat,
                                    const Vec2& y, int l, const Scene& scene, const EvolutionPlan& plan,
                                    const SandwichOptions& opt);

/*!
 * Integrand of the correction term at time t, comoving form:
 *   ([V^s(x+y+X) - V^s(X) + V^l(x+y+X)] a, b) - (V^l(t p/mu + (2+sign) a t^2 e1 + v t) a, b)
 * with a = e^{-itK} U'(t) Phi0 and b likewise. sign = -1 is the Schroedinger-picture
 * placement of the trajectory term; +1 is kept for the consistency test.
 */
cplx sd_correction_integrand(double t, const Field2D& Phi0, const Field2D& Psi0, const Vec2& v, const Vec2& y,
                             const Scene& scene, int sign = -1);

struct CorrectionResult {
  cplx value;
  double error = 0;
  double t_grid = 0;  // |t| up to which the integrand is evaluated on the grid
  cplx tail;          // contribution beyond t_grid from the moment expansion (V^s only)
};

/*!
 * speed * int dt of the integrand. Beyond the time where the freely spreading
 * packets reach the margin, the V^s part is continued by its second-order
 * expansion about the trajectory with exact free moments; V^l is truncated there.
 */
CorrectionResult sd_correction_element(const Field2D& Phi0, const Field2D& Psi0, double speed, const Vec2& vhat,
                                       const Vec2& y, const Scene& scene, double tol = 1e-8);

/// Radius about the origin enclosing every term's core (tails excluded).
double potential_extent(const PairPotential& V);

/// Starting half-duration: time for the potential core, shifted by y, and the packet to separate.
double default_T0(const Scene& scene, double speed, const Vec2& y, double packet_radius);

}  // namespace hvs

#endif
