#ifndef HVSCAT_RECONSTRUCTION_HPP
#define HVSCAT_RECONSTRUCTION_HPP

#include <functional>
#include <string>
#include <vector>

#include "hvscat/radon.hpp"
#include "hvscat/scattering.hpp"

namespace hvs {

// ---- X-ray oracle -------------------------------------------------------

/// Sparse form of a pointwise product a conj(b) cell, dropping samples below rel_cut of the peak.
struct DensityPoints {
  std::vector<Vec2> x;
  std::vector<cplx> w;
  Vec2 centre = Vec2::Zero();
  double radius = 0;  // largest |x - centre| kept
};
DensityPoints density_points(const Field2D& a, const Field2D& b, double rel_cut = 1e-14);

enum class XRayForm {
  derivative,  // i int dtau ((d_l V)(x + y + tau vhat) Phi, Psi)
  commuted,    // vs part through [V, p_l], s and l parts through their gradients
};

struct XRayOptions {
  XRayForm form = XRayForm::derivative;
  double tol = 1e-10;
};

/// Right-hand side of the reconstruction formula: the line integral through y along vhat.
cplx xray_rhs(const Field2D& Phi, const Field2D& Psi, const Vec2& y, const Vec2& vhat, int l,
              const PotentialSplit& V, const XRayOptions& opt = {});

/// int dtau (V(x + y + tau vhat) Phi, Psi) for a single bucket, e.g. the vs part.
cplx xray_potential(const Field2D& Phi, const Field2D& Psi, const Vec2& y, const Vec2& vhat, const PairPotential& V,
                    double tol = 1e-10);

// ---- high-velocity scans -------------------------------------------------

enum class ScanQuantity {
  commutator,  // v i[S^D, p_l] / I_G, limit xray_rhs
  vs_only,     // v i (S^D - I_G) minus I_G times the correction element, limit xray_potential of V^vs
};

struct ScanOptions {
  std::vector<double> v_list{8, 16, 32, 64};
  ScanQuantity quantity = ScanQuantity::commutator;
  int l = 1;
  EvolutionPlan plan;       // dt is replaced by dt_scale / v
  double dt_scale = 0.2;
  SandwichOptions sandwich;
  bool divide_graf = true;  // divide each value by I_{G,v}; the limit is unchanged
  double correction_tol = 1e-8;
  int min_fit_points = 4;
  double rho_min = 0.05, rho_max = 3.0;
};

struct ScanPoint {
  double v = 0;
  cplx raw;          // before the Graf division / correction
  cplx graf{1, 0};   // I_{G,v}
  cplx correction;   // correction element (vs_only)
  cplx value;
  bool converged = false;
  double cauchy = 0, T = 0, boundary_mass = 0, wall_seconds = 0;
  long steps = 0;
  bool skipped = false;
  std::string note;
};

struct LimitFit {
  cplx limit;
  cplx coeff;
  double rho = 0;        // exponent of the component dominating at the largest v
  double rho_re = 0, rho_im = 0;
  double residual = 0;  // largest |value - model| over the fitted points
  bool ok = false;
  std::string flag;
};

/// Fits L + c v^-rho separately to the real and imaginary parts: rho by Brent's method, (L, c) by least squares.
LimitFit fit_limit(const std::vector<double>& v, const std::vector<cplx>& values, double rho_min = 0.05,
                   double rho_max = 3.0);

struct ScanResult {
  std::vector<ScanPoint> points;
  LimitFit fit;
  cplx limit;   // the fitted limit, or the last value when flagged
  double rho = 0;
  double residual = 0;
  std::vector<std::string> flags;
  bool flagged() const { return !flags.empty(); }
};

/*!
 * Runs the chosen quantity for every speed in opt.v_list on the states
 * translated by y. Speeds whose trajectory returns to the scene (charged pair,
 * direction close to the field) are skipped and noted.
 */
ScanResult hv_scan(const Field2D& Phi0, const Field2D& Psi0, const Vec2& y, const Vec2& vhat, const Scene& scene,
                   const ScanOptions& opt);

/// One value of the vs_only quantity at a single speed.
ScanPoint vs_element(const Field2D& Phi0, const Field2D& Psi0, double speed, const Vec2& vhat, const Vec2& y,
                     const Scene& scene, const EvolutionPlan& plan, const SandwichOptions& sw, double corr_tol);

/// Distance at which a charged trajectory with this velocity comes back past the origin (infinity if never).
double return_distance(const Vec2& v, const StarkParams& sp);

// ---- recovery -----------------------------------------------------------

struct LineIntegral {
  cplx value;
  double edge_ratio = 0;  // |f| at the far end of the ray over the peak
  std::vector<std::string> warnings;
};

/// i int_0^inf f(t e1) dt along the row y2 = 0 of the image.
LineIntegral recover_line_integral(const CArray& f, const Grid2D& g);

struct PointwiseEstimate {
  std::vector<Vec2> centres;
  std::vector<cplx> value;     // estimate of V at each centre (imaginary part is numerical noise)
  std::vector<bool> skipped;
  double smear_width = 0;      // rms radius of |phi|^2 the estimate is averaged over
};

/*!
 * Estimates V at each centre x0 from the image f(y) = i((d_1 V)(x + y) phi, phi) of an
 * untranslated packet phi. Centring phi at x0 shifts the image by x0, so the
 * pipeline value for x0 is i int_0^inf f(x0 + t e1) dt / (phi, phi).
 */
PointwiseEstimate pointwise_potential(const CArray& f, const Grid2D& g, const std::vector<Vec2>& centres,
                                      cplx overlap, double smear_width = 0);

/// Same bookkeeping for the vs_only pipeline, whose image is h(y) = (V^vs(x + y) phi, phi) directly.
PointwiseEstimate pointwise_from_h(const CArray& h, const Grid2D& g, const std::vector<Vec2>& centres, cplx overlap,
                                   double smear_width = 0);

/// Bilinear interpolation of an image on g (zero outside).
cplx interpolate(const CArray& f, const Grid2D& g, const Vec2& x);

// ---- end-to-end pipelines ----------------------------------------------

struct PipelineOptions {
  int n_angles = 64;
  int n_offsets = 128;
  double ds = 0.1;
  ScanOptions scan;
  Grid2D image;              // grid of the reconstructed f or h
  FbpOptions fbp;
  int workers = 1;
  double packet_radius = 0;  // 0: from the density of phi
  /// A priori bound on the support of the unknown part about the origin; lines
  /// missing it by more than the packet radius are zero without a run. 0 disables.
  double support_radius = 0;
  std::function<void(int done, int total)> progress;
};

struct PipelineResult {
  Sinogram sinogram;
  FbpResult image;
  std::vector<Vec2> centres;
  PointwiseEstimate estimate;
  cplx overlap;
  long samples_run = 0, samples_local_zero = 0, samples_flagged = 0;
  double wall_seconds = 0;
};

/// Sinogram of a scan quantity for the packet pair phi, psi; offsets beyond reach are exactly zero.
Sinogram scan_sinogram(const Field2D& phi, const Field2D& psi, const Scene& scene, const PipelineOptions& opt);

/// The limit each scan sample should reach, from the oracle integrals.
Sinogram oracle_sinogram(const Field2D& phi, const Field2D& psi, const Scene& scene, const PipelineOptions& opt);

/// Commutator pipeline: sinogram, inversion, half-line integrals at `centres`.
PipelineResult pointwise_pipeline(const Field2D& phi, const Scene& scene, const std::vector<Vec2>& centres,
                                  const PipelineOptions& opt);

/// vs_only pipeline with V^s and V^l known: sinogram of h, inversion, h(x0) / (phi, phi).
PipelineResult recover_vs(const Field2D& phi, const Scene& scene, const std::vector<Vec2>& centres,
                                  const PipelineOptions& opt);

}  // namespace hvs

#endif
