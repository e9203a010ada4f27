#pragma once

#include <complex>
#include <vector>

#include "shapecx/image.hpp"

namespace shapecx {

using Complex = std::complex<double>;

/// In-place radix-2 Cooley-Tukey; n must be a power of two.
void fft_pow2(Complex* a, int n, bool inverse);

/// 2-d DFT of a mask: rows then columns, no normalization.
/// Result is 64x64 row-major; bin (0,0) is the DC term.
std::vector<Complex> fft2d(const Mask& m);

/// 2-d DFT of arbitrary real data, size n x n (n a power of two).
std::vector<Complex> fft2d_real(const std::vector<double>& data, int n);

} // namespace shapecx
