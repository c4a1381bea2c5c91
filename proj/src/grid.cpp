#include "hvscat/grid.hpp"

#include <algorithm>
#include <cmath>

#include "hvscat/fft.hpp"

namespace hvs {

Eigen::ArrayXd Grid2D::xs() const {
  Eigen::ArrayXd a(nx);
  for (int i = 0; i < nx; ++i) a(i) = x(i);
  return a;
}

Eigen::ArrayXd Grid2D::ys() const {
  Eigen::ArrayXd a(ny);
  for (int j = 0; j < ny; ++j) a(j) = y(j);
  return a;
}

Eigen::ArrayXd Grid2D::pxs() const {
  Eigen::ArrayXd a(nx);
  for (int k = 0; k < nx; ++k) a(k) = px(k);
  return a;
}

Eigen::ArrayXd Grid2D::pys() const {
  Eigen::ArrayXd a(ny);
  for (int k = 0; k < ny; ++k) a(k) = py(k);
  return a;
}

RArray Grid2D::p2() const {
  const Eigen::ArrayXd a = pxs().square(), b = pys().square();
  RArray out(ny, nx);
  for (int j = 0; j < ny; ++j) out.row(j) = a.transpose() + b(j);
  return out;
}

void Grid2D::validate() const {
  if (nx < 16 || ny < 16) throw ShapeError("grid needs at least 16 points per axis");
  if (nx % 2 || ny % 2) throw ShapeError("grid point counts must be even");
  if (!(lx > 0) || !(ly > 0)) throw DomainError("grid box lengths must be positive");
}

double gaussian_support_radius(double w) { return std::sqrt(std::log(1e12)) / w; }

void to_momentum(Field2D& f) { fft::forward(f.data.data(), f.grid.ny, f.grid.nx); }
void to_position(Field2D& f) { fft::inverse(f.data.data(), f.grid.ny, f.grid.nx); }

Field2D make_packet(const Grid2D& g, const PacketSpec& s) {
  g.validate();
  const double pn = g.p_nyquist();
  Field2D f(g);
  if (s.envelope == Envelope::gaussian) {
    if (!(s.w > 0)) throw DomainError("packet width must be positive");
    const double need = gaussian_support_radius(s.w);
    const double P = s.P > 0 ? s.P : need;
    if (P < need) throw DomainError("gaussian packet: P below the 1e-12 truncation radius 5.26/w");
    if (s.w < 4 * std::max(g.dx(), g.dy())) throw ResolutionError("packet width below 4 grid spacings");
    if (P + s.p0.norm() > 0.8 * pn) throw ResolutionError("packet momentum support beyond 0.8 Nyquist");
    const Eigen::ArrayXd X = g.xs() - s.x0(0), Y = g.ys() - s.x0(1);
    const double c = 0.5 / (s.w * s.w);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double ph = s.p0(0) * g.x(i) + s.p0(1) * g.y(j);
        f.data(j, i) = std::exp(-c * (X(i) * X(i) + Y(j) * Y(j))) * cplx(std::cos(ph), std::sin(ph));
      }
  } else {
    if (!(s.P > 0)) throw DomainError("bump packet needs a support radius P");
    if (s.P + s.p0.norm() > 0.8 * pn) throw ResolutionError("packet momentum support beyond 0.8 Nyquist");
    if (2 * M_PI / std::min(g.lx, g.ly) * 4 > s.P) throw ResolutionError("bump support spans under 4 lattice momenta");
    const Eigen::ArrayXd kx = g.pxs(), ky = g.pys();
    const double xf = g.x(0), yf = g.y(0);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double u = (Vec2(kx(i), ky(j)) - s.p0).squaredNorm() / (s.P * s.P);
        if (u >= 1) continue;
        const double ph = -(kx(i) * (s.x0(0) - xf) + ky(j) * (s.x0(1) - yf));
        f.data(j, i) = std::exp(-1.0 / (1.0 - u)) * cplx(std::cos(ph), std::sin(ph));
      }
    to_position(f);
  }
  f.data /= norm(f);
  return f;
}

double default_margin(const Grid2D& g) { return std::min(g.lx, g.ly) / 16; }

double boundary_mass(const Field2D& f, double strip) {
  const Grid2D& g = f.grid;
  const int mx = std::min(g.nx / 2, static_cast<int>(std::ceil(strip / g.dx())));
  const int my = std::min(g.ny / 2, static_cast<int>(std::ceil(strip / g.dy())));
  const RArray a = f.data.abs2();
  const double total = a.sum();
  const double inner = a.block(my, mx, g.ny - 2 * my, g.nx - 2 * mx).sum();
  return std::max(0.0, total - inner) * g.cell();
}

void check_margin(const Field2D& f, double strip, const char* what) {
  const double m = boundary_mass(f, strip);
  if (m > 1e-10)
    throw GeometryError(std::string(what) + ": mass " + std::to_string(m) + " inside the anti-wraparound margin");
}

Field2D translate(const Field2D& f, const Vec2& y, double margin) {
  Field2D out = f;
  if (y.isZero()) return out;
  to_momentum(out);
  const Eigen::ArrayXd kx = f.grid.pxs(), ky = f.grid.pys();
  for (int j = 0; j < f.grid.ny; ++j)
    for (int i = 0; i < f.grid.nx; ++i) {
      const double ph = -(kx(i) * y(0) + ky(j) * y(1));
      out.data(j, i) *= cplx(std::cos(ph), std::sin(ph));
    }
  to_position(out);
  check_margin(out, margin < 0 ? default_margin(f.grid) : margin, "translate");
  return out;
}

void apply_plane_wave(Field2D& f, const Vec2& k) {
  const Grid2D& g = f.grid;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double ph = k(0) * g.x(i) + k(1) * g.y(j);
      f.data(j, i) *= cplx(std::cos(ph), std::sin(ph));
    }
}

double momentum_mass_outside(const Field2D& f, const Vec2& c, double P) {
  Field2D h = f;
  to_momentum(h);
  const Eigen::ArrayXd kx = f.grid.pxs(), ky = f.grid.pys();
  double out = 0, tot = 0;
  for (int j = 0; j < f.grid.ny; ++j)
    for (int i = 0; i < f.grid.nx; ++i) {
      const double a = std::norm(h.data(j, i));
      tot += a;
      if ((Vec2(kx(i), ky(j)) - c).norm() >= P) out += a;
    }
  return tot > 0 ? out / tot : 0.0;
}

Field2D boost(const Field2D& f, double m, const Vec2& v) {
  Field2D out = f;
  if (v.isZero()) return out;
  apply_plane_wave(out, m * v);
  // mass near the edge of the momentum box signals aliasing
  Field2D h = out;
  to_momentum(h);
  const Eigen::ArrayXd kx = f.grid.pxs(), ky = f.grid.pys();
  const double lim = 0.8 * f.grid.p_nyquist();
  double bad = 0;
  for (int j = 0; j < f.grid.ny; ++j)
    for (int i = 0; i < f.grid.nx; ++i)
      if (std::abs(kx(i)) > lim || std::abs(ky(j)) > lim) bad += std::norm(h.data(j, i));
  if (bad > 1e-10 * h.data.abs2().sum()) throw ResolutionError("boost: momentum support beyond 0.8 Nyquist");
  return out;
}

cplx inner(const Field2D& f, const Field2D& g) {
  if (f.grid != g.grid) throw ShapeError("inner: grid mismatch");
  return (f.data * g.data.conjugate()).sum() * f.grid.cell();
}

double norm(const Field2D& f) { return std::sqrt(f.data.abs2().sum() * f.grid.cell()); }

Field2D momentum_op(const Field2D& f, int l) {
  if (l != 1 && l != 2) throw DomainError("momentum component must be 1 or 2");
  Field2D out = f;
  to_momentum(out);
  if (l == 1) {
    const Eigen::ArrayXd k = f.grid.pxs();
    for (int j = 0; j < f.grid.ny; ++j) out.data.row(j) *= k.transpose().cast<cplx>();
  } else {
    const Eigen::ArrayXd k = f.grid.pys();
    for (int j = 0; j < f.grid.ny; ++j) out.data.row(j) *= k(j);
  }
  to_position(out);
  return out;
}

Vec2 position_mean(const Field2D& f) {
  const RArray a = f.data.abs2();
  const double tot = a.sum();
  const Eigen::ArrayXd X = f.grid.xs(), Y = f.grid.ys();
  return Vec2((a.colwise().sum().transpose() * X).sum() / tot, (a.rowwise().sum() * Y).sum() / tot);
}

Vec2 momentum_mean(const Field2D& f) {
  Field2D h = f;
  to_momentum(h);
  const RArray a = h.data.abs2();
  const double tot = a.sum();
  const Eigen::ArrayXd X = f.grid.pxs(), Y = f.grid.pys();
  return Vec2((a.colwise().sum().transpose() * X).sum() / tot, (a.rowwise().sum() * Y).sum() / tot);
}

namespace {

/// Accumulates f(term, u, d) over each term's bounding box, d = x + shift - center.
template <class F>
RArray sample_terms(const PairPotential& v, const Grid2D& g, const Vec2& shift, F&& f) {
  RArray out = RArray::Zero(g.ny, g.nx);
  const Eigen::ArrayXd X = g.xs(), Y = g.ys();
  for (const auto& t : v.terms()) {
    // sample only the box where the term exceeds 1e-17 of its amplitude
    const Vec2 c = t.center - shift;
    const double r = t.negligible_radius(1e-17 * std::abs(t.amplitude));
    int i0 = 0, i1 = g.nx, j0 = 0, j1 = g.ny;
    if (std::isfinite(r)) {
      // clamp before converting: slow tails give radii far beyond int range
      auto idx = [](double u, int n) { return static_cast<int>(std::clamp(u, 0.0, double(n))); };
      i0 = idx(std::floor((c(0) - r - X(0)) / g.dx()), g.nx);
      i1 = idx(std::ceil((c(0) + r - X(0)) / g.dx()) + 1, g.nx);
      j0 = idx(std::floor((c(1) - r - Y(0)) / g.dy()), g.ny);
      j1 = idx(std::ceil((c(1) + r - Y(0)) / g.dy()) + 1, g.ny);
    }
    for (int j = j0; j < j1; ++j)
      for (int i = i0; i < i1; ++i) {
        const double dx = X(i) - c(0), dy = Y(j) - c(1);
        double a, b, d;
        t.profile(dx * dx + dy * dy, a, b, d);
        out(j, i) += f(a, b, dx, dy);
      }
  }
  return out;
}

}  // namespace

RArray sample(const PairPotential& v, const Grid2D& g, const Vec2& shift) {
  return sample_terms(v, g, shift, [](double a, double, double, double) { return a; });
}

RArray sample_gradient(const PairPotential& v, const Grid2D& g, int l, const Vec2& shift) {
  if (l != 1 && l != 2) throw DomainError("sample_gradient: l must be 1 or 2");
  return sample_terms(v, g, shift, [l](double, double b, double dx, double dy) { return 2 * b * (l == 1 ? dx : dy); });
}

}  // namespace hvs
