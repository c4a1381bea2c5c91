#ifndef HVSCAT_FFT_HPP
#define HVSCAT_FFT_HPP

#include <complex>

namespace hvs::fft {

/// Unitary 2-D transforms of a row-major ny-by-nx array, in place.
/// Plans are created once per shape and shared between threads.
void forward(std::complex<double>* data, int ny, int nx);
void inverse(std::complex<double>* data, int ny, int nx);

}  // namespace hvs::fft

#endif
