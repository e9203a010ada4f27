#include "shapecx/fft.hpp"

#include <cmath>

#include "shapecx/error.hpp"

namespace shapecx {
namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace

void fft_pow2(Complex* a, int n, bool inverse) {
    if (!is_pow2(n)) throw DimensionError("fft length must be a power of two");
    // bit-reversal permutation
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * kPi / len;
        const Complex wl(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (int k = 0; k < len / 2; ++k) {
                const Complex u = a[i + k];
                const Complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (int i = 0; i < n; ++i) a[i] /= n;
}

std::vector<Complex> fft2d_real(const std::vector<double>& data, int n) {
    if (static_cast<int>(data.size()) != n * n)
        throw DimensionError("fft2d_real: data size does not match n*n");
    std::vector<Complex> spec(data.begin(), data.end());
    for (int y = 0; y < n; ++y) fft_pow2(spec.data() + static_cast<size_t>(y) * n, n, false);
    std::vector<Complex> col(static_cast<size_t>(n));
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) col[static_cast<size_t>(y)] = spec[static_cast<size_t>(y) * n + x];
        fft_pow2(col.data(), n, false);
        for (int y = 0; y < n; ++y) spec[static_cast<size_t>(y) * n + x] = col[static_cast<size_t>(y)];
    }
    return spec;
}

std::vector<Complex> fft2d(const Mask& m) {
    std::vector<double> data(m.pixels.begin(), m.pixels.end());
    return fft2d_real(data, kMaskSize);
}

} // namespace shapecx
