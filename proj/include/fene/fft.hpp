#pragma once

#include <complex>

namespace fene::lp::fft {

using cplx = std::complex<double>;

// Forward transform to Fourier coefficients (scaled by 1/n^2) and the
// unscaled synthesis back to grid values.  Plans are cached per shape.
void forward(int n, const double* in, cplx* out);
void inverse(int n, const cplx* in, double* out);

// Interleaved batches: channel c of grid point p lives at p*howmany + c, in
// both the physical and the spectral arrays.
void forward_many(int n, int howmany, const double* in, cplx* out);
void inverse_many(int n, int howmany, const cplx* in, double* out);

}  // namespace fene::lp::fft
