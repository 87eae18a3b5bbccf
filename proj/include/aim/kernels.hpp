#pragma once

#include <complex>
#include <cstddef>

#include "aim/raster.hpp"

// Numeric kernels shared by the imaging and simulation layers.
//
// Each heavy kernel has two implementations:
//   * the production path, OpenMP-parallel over independent rows/elements,
//   * a plain serial reference (`*_reference`), kept so the tests can check
//     the fast path against a straightforward direct computation. The
//     references are also used as oracles where a literal summation is the
//     contract (small-raster reconstruction checks).
//
// All parallel loops write disjoint output elements; no cross-thread
// reductions are performed, so results are bit-identical regardless of the
// number of threads.
//
// Transform sign convention used throughout the project:
//   sign = +1 : sum of x * exp(+j 2 pi k n / N)   (scene -> visibility)
//   sign = -1 : sum of x * exp(-j 2 pi k n / N)   (visibility -> image)
// Neither direction applies a normalization factor; callers scale.
namespace aim::kernels {

using cd = std::complex<double>;

// In-place radix-2 FFT, serial, n must be a power of two.
void fft_inplace(cd* x, std::size_t n, int sign);

// 2D FFT over a power-of-two raster. Parallel across rows/columns.
void fft2d_inplace(CRaster& a, int sign);

// Direct-summation 2D DFT (exact-table twiddles, serial). O(N^2 M^2);
// reference implementation for fft2d_inplace on small rasters.
CRaster dft2d_reference(const CRaster& a, int sign);

// Circular 2D convolution c(p) = sum_q a(q) b(p - q), indices modulo the
// raster shape. FFT-based, parallel.
CRaster convolve2d_circular(const CRaster& a, const CRaster& b);

// Direct spatial-sum circular convolution, serial reference.
CRaster convolve2d_reference(const CRaster& a, const CRaster& b);

} // namespace aim::kernels
