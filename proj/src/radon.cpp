#include "hvscat/radon.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "hvscat/fft.hpp"

namespace hvs {

std::vector<double> uniform_angles(int n) {
  if (n < 1) throw DomainError("uniform_angles: need at least one angle");
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = (i + 0.5) * M_PI / n;
  return t;
}

std::vector<double> uniform_offsets(int n, double ds) {
  if (n < 2 || !(ds > 0)) throw DomainError("uniform_offsets: need n >= 2 and ds > 0");
  std::vector<double> s(n);
  for (int i = 0; i < n; ++i) s[i] = (i - 0.5 * (n - 1)) * ds;
  return s;
}

int Sinogram::flagged() const {
  int n = 0;
  for (const auto& m : meta) n += m.flag.empty() ? 0 : 1;
  return n;
}

Sinogram assemble_sinogram(const std::vector<double>& theta, const std::vector<double>& s,
                           const SinogramSampler& sampler, int workers, const std::function<void(int, int)>& progress) {
  Sinogram out;
  out.theta = theta;
  out.s = s;
  const int nt = int(theta.size()), ns = int(s.size()), total = nt * ns;
  out.values = CArray::Zero(nt, ns);
  out.meta.assign(total, {});
  std::atomic<int> next{0}, done{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto work = [&] {
    for (int k = next++; k < total; k = next++) {
      try {
        out.meta[k] = sampler(theta[k / ns], s[k % ns]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        next = total;
        return;
      }
      const int d = ++done;
      if (progress) {
        std::lock_guard<std::mutex> lock(err_mu);
        progress(d, total);
      }
    }
  };
  workers = std::max(1, workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);
  for (int k = 0; k < total; ++k) out.values(k / ns, k % ns) = out.meta[k].value;
  return out;
}

namespace {

/// Ramp filter response on an M-point periodic lattice, from the band-limited spatial kernel.
std::vector<cplx> ramp_response(int M, double ds, bool hann) {
  std::vector<cplx> h(M, 0.0);
  for (int k = 0; k < M; ++k) {
    const int n = k < M / 2 ? k : k - M;
    if (n == 0)
      h[k] = 1.0 / (4 * ds * ds);
    else if (n % 2 != 0)
      h[k] = -1.0 / (M_PI * M_PI * double(n) * n * ds * ds);
  }
  fft::forward(h.data(), 1, M);
  const double scale = std::sqrt(double(M));
  for (int k = 0; k < M; ++k) {
    const int n = k < M / 2 ? k : k - M;
    const double w = hann ? 0.5 * (1 + std::cos(M_PI * n / (M / 2))) : 1.0;
    h[k] = h[k].real() * scale * w;  // the kernel is real and even
  }
  return h;
}

}  // namespace

FbpResult radon_invert(const Sinogram& sino, const Grid2D& out, const FbpOptions& opt) {
  out.validate();
  const int nt = int(sino.theta.size()), ns = int(sino.s.size());
  if (sino.values.rows() != nt || sino.values.cols() != ns) throw ShapeError("radon_invert: sinogram shape");
  if (ns < 2 || nt < 1) throw DomainError("radon_invert: empty sinogram");
  const double ds = sino.s[1] - sino.s[0];
  for (int m = 1; m < ns; ++m)
    if (std::abs(sino.s[m] - sino.s[m - 1] - ds) > 1e-9 * std::abs(ds)) throw DomainError("radon_invert: offsets must be uniform");
  if (!(ds > 0)) throw DomainError("radon_invert: offsets must increase");

  FbpResult r;
  r.grid = out;
  if (nt < opt.min_angles || ns < opt.min_offsets)
    r.warnings.push_back("resolution: " + std::to_string(nt) + " angles x " + std::to_string(ns) +
                         " offsets is below " + std::to_string(opt.min_angles) + " x " + std::to_string(opt.min_offsets));
  const double reach = std::hypot(0.5 * out.lx + std::abs(out.origin(0)), 0.5 * out.ly + std::abs(out.origin(1)));
  if (reach > std::max(std::abs(sino.s.front()), std::abs(sino.s.back())) + ds)
    r.warnings.push_back("coverage: the image extends beyond the offset span");

  int M = 1;
  while (M < 2 * ns) M *= 2;
  const std::vector<cplx> H = ramp_response(M, ds, opt.hann);
  CArray Q(nt, ns);
  std::vector<cplx> buf(M);
  for (int i = 0; i < nt; ++i) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (int m = 0; m < ns; ++m) buf[m] = sino.values(i, m);
    fft::forward(buf.data(), 1, M);
    for (int k = 0; k < M; ++k) buf[k] *= H[k];
    fft::inverse(buf.data(), 1, M);
    for (int m = 0; m < ns; ++m) Q(i, m) = ds * buf[m];
  }

  r.image = CArray::Zero(out.ny, out.nx);
  const Eigen::ArrayXd xs = out.xs(), ys = out.ys();
  const double s0 = sino.s.front();
  for (int i = 0; i < nt; ++i) {
    const Vec2 n = normal(sino.theta[i]);
    for (int j = 0; j < out.ny; ++j)
      for (int k = 0; k < out.nx; ++k) {
        const double u = (xs(k) * n(0) + ys(j) * n(1) - s0) / ds;
        const double fl = std::floor(u);
        const int m = int(fl);
        if (m < 0 || m + 1 >= ns) {
          if (m == ns - 1 && u == fl) r.image(j, k) += Q(i, m);
          continue;
        }
        const double a = u - fl;
        r.image(j, k) += (1 - a) * Q(i, m) + a * Q(i, m + 1);
      }
  }
  r.image *= M_PI / nt;
  return r;
}

PhantomReport radon_selftest(int n_angles, int n_offsets, double tol) {
  const auto t0 = std::chrono::steady_clock::now();
  Sinogram s;
  s.theta = uniform_angles(n_angles);
  s.s = uniform_offsets(n_offsets, 12.0 / n_offsets);
  s.values.resize(n_angles, n_offsets);
  for (int i = 0; i < n_angles; ++i)
    for (int m = 0; m < n_offsets; ++m) s.values(i, m) = std::sqrt(M_PI) * std::exp(-s.s[m] * s.s[m]);
  const Grid2D g{128, 128, 8, 8};
  FbpOptions o;
  const FbpResult r = radon_invert(s, g, o);
  double num = 0, den = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int k = 0; k < g.nx; ++k) {
      const double exact = std::exp(-(g.x(k) * g.x(k) + g.y(j) * g.y(j)));
      num += std::norm(r.image(j, k) - exact);
      den += exact * exact;
    }
  PhantomReport p;
  p.rel_l2 = std::sqrt(num / den);
  p.passed = p.rel_l2 <= tol;
  p.warnings = r.warnings;
  p.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return p;
}

}  // namespace hvs
