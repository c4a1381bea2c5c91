#ifndef HVSCAT_GRID_HPP
#define HVSCAT_GRID_HPP

#include <complex>

#include <Eigen/Dense>

#include "hvscat/errors.hpp"
#include "hvscat/potentials.hpp"

namespace hvs {

using cplx = std::complex<double>;
using CArray = Eigen::Array<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RArray = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Periodic box centred on `origin`; x_i = origin_x + (i - nx/2) dx. Arrays are ny-by-nx.
struct Grid2D {
  int nx = 256, ny = 256;
  double lx = 32, ly = 32;
  Vec2 origin = Vec2::Zero();

  double dx() const { return lx / nx; }
  double dy() const { return ly / ny; }
  double cell() const { return dx() * dy(); }
  double x(int i) const { return origin(0) + (i - nx / 2) * dx(); }
  double y(int j) const { return origin(1) + (j - ny / 2) * dy(); }
  /// Signed lattice momenta in FFT order.
  double px(int k) const { return 2 * M_PI / lx * (k < nx / 2 ? k : k - nx); }
  double py(int k) const { return 2 * M_PI / ly * (k < ny / 2 ? k : k - ny); }
  double p_nyquist() const { return std::min(M_PI / dx(), M_PI / dy()); }

  Eigen::ArrayXd xs() const;
  Eigen::ArrayXd ys() const;
  Eigen::ArrayXd pxs() const;
  Eigen::ArrayXd pys() const;
  /// |p|^2 on the momentum lattice.
  RArray p2() const;

  void validate() const;
  bool operator==(const Grid2D& o) const {
    return nx == o.nx && ny == o.ny && lx == o.lx && ly == o.ly && origin == o.origin;
  }
  bool operator!=(const Grid2D& o) const { return !(*this == o); }
};

struct Field2D {
  Grid2D grid;
  CArray data;

  Field2D() = default;
  explicit Field2D(const Grid2D& g) : grid(g), data(CArray::Zero(g.ny, g.nx)) {}
  Field2D(const Grid2D& g, CArray d) : grid(g), data(std::move(d)) {}
};

enum class Envelope { gaussian, bump };

struct PacketSpec {
  Envelope envelope = Envelope::gaussian;
  double w = 1.0;
  double P = 0.0;  // momentum support radius; 0 selects the gaussian truncation radius
  Vec2 x0 = Vec2::Zero();
  Vec2 p0 = Vec2::Zero();
};

/// Radius beyond which a gaussian packet of width w holds at most 1e-12 of its momentum mass.
double gaussian_support_radius(double w);

Field2D make_packet(const Grid2D& g, const PacketSpec& spec);

// Spectral transforms keep the unitary normalization.
void to_momentum(Field2D& f);
void to_position(Field2D& f);

/// Default anti-wraparound strip: 1/16 of the shorter box side.
double default_margin(const Grid2D& g);
/// Mass of the field within `strip` of the box boundary.
double boundary_mass(const Field2D& f, double strip);
void check_margin(const Field2D& f, double strip, const char* what);

Field2D translate(const Field2D& f, const Vec2& y, double margin = -1);
Field2D boost(const Field2D& f, double m, const Vec2& v);
/// Multiplies by exp(i k.x) without the Nyquist check.
void apply_plane_wave(Field2D& f, const Vec2& k);

/// (f, g) = sum f conj(g) dx dy, linear in the first argument.
cplx inner(const Field2D& f, const Field2D& g);
double norm(const Field2D& f);
/// p_l f with l in {1, 2}.
Field2D momentum_op(const Field2D& f, int l);

Vec2 position_mean(const Field2D& f);
Vec2 momentum_mean(const Field2D& f);
/// Largest momentum-space mass fraction outside the disk |p - c| < P.
double momentum_mass_outside(const Field2D& f, const Vec2& c, double P);

/// V(x + shift) sampled on the grid.
RArray sample(const PairPotential& v, const Grid2D& g, const Vec2& shift = Vec2::Zero());
/// (d V / d x_l)(x + shift) sampled on the grid, l in {1, 2}.
RArray sample_gradient(const PairPotential& v, const Grid2D& g, int l, const Vec2& shift = Vec2::Zero());

}  // namespace hvs

#endif
