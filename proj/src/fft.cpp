#include "hvscat/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace hvs::fft {

namespace {

struct PlanPair {
  fftw_plan aligned = nullptr;
  fftw_plan unaligned = nullptr;
};

std::mutex g_mutex;
std::map<std::tuple<int, int, int>, PlanPair> g_plans;

fftw_plan make_plan(int ny, int nx, int sign, unsigned extra) {
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * ny * nx));
  fftw_plan p = fftw_plan_dft_2d(ny, nx, buf, buf, sign, FFTW_ESTIMATE | extra);
  fftw_free(buf);
  return p;
}

void execute(std::complex<double>* data, int ny, int nx, int sign) {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  const bool aligned = fftw_alignment_of(reinterpret_cast<double*>(data)) == 0;
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(g_mutex);
    PlanPair& pp = g_plans[{ny, nx, sign}];
    fftw_plan& slot = aligned ? pp.aligned : pp.unaligned;
    if (!slot) slot = make_plan(ny, nx, sign, aligned ? 0u : FFTW_UNALIGNED);
    plan = slot;
  }
  fftw_execute_dft(plan, p, p);
  const double s = 1.0 / std::sqrt(static_cast<double>(nx) * ny);
  for (long i = 0, n = static_cast<long>(nx) * ny; i < n; ++i) data[i] *= s;
}

}  // namespace

void forward(std::complex<double>* data, int ny, int nx) { execute(data, ny, nx, FFTW_FORWARD); }
void inverse(std::complex<double>* data, int ny, int nx) { execute(data, ny, nx, FFTW_BACKWARD); }

}  // namespace hvs::fft
