#ifndef HVSCAT_RADON_HPP
#define HVSCAT_RADON_HPP

#include <functional>
#include <string>
#include <vector>

#include "hvscat/grid.hpp"

namespace hvs {

/// Line {s n + tau vhat} with vhat = (cos theta, sin theta), n = (-sin theta, cos theta).
inline Vec2 direction(double theta) { return Vec2(std::cos(theta), std::sin(theta)); }
inline Vec2 normal(double theta) { return Vec2(-std::sin(theta), std::cos(theta)); }

/// theta_i = (i + 1/2) pi / n; never exactly parallel to e1.
std::vector<double> uniform_angles(int n);
/// n offsets spaced ds, symmetric about zero.
std::vector<double> uniform_offsets(int n, double ds);

struct SinogramSample {
  cplx value;
  double v_max = 0;
  double rho = 0;
  double residual = 0;
  std::string flag;  // empty when clean
};

struct Sinogram {
  std::vector<double> theta, s;
  CArray values;                      // n_theta by n_s
  std::vector<SinogramSample> meta;   // row-major, same layout
  int flagged() const;
};

using SinogramSampler = std::function<SinogramSample(double theta, double s)>;

/// Evaluates every (theta, s); samples are independent and spread over `workers` threads.
Sinogram assemble_sinogram(const std::vector<double>& theta, const std::vector<double>& s,
                           const SinogramSampler& sampler, int workers = 1,
                           const std::function<void(int, int)>& progress = {});

struct FbpOptions {
  bool hann = true;  // raised-cosine apodization of the ramp
  int min_angles = 64;
  int min_offsets = 128;
};

struct FbpResult {
  CArray image;
  Grid2D grid;
  std::vector<std::string> warnings;
};

/// Filtered back-projection onto `out`: band-limited ramp, Hann window, linear interpolation.
FbpResult radon_invert(const Sinogram& sino, const Grid2D& out, const FbpOptions& opt = {});

/// Gaussian phantom exp(-|y|^2) and its Radon transform sqrt(pi) exp(-s^2).
struct PhantomReport {
  double rel_l2 = 0;
  double seconds = 0;
  bool passed = false;
  std::vector<std::string> warnings;
};
PhantomReport radon_selftest(int n_angles = 180, int n_offsets = 256, double tol = 0.02);

}  // namespace hvs

#endif
