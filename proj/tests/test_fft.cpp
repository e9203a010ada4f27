#include <cstring>

#include "doctest.h"
#include "helpers/oracles.hpp"
#include "shapecx/fft.hpp"
#include "shapecx/measures.hpp"
#include "shapecx/shapes.hpp"

using namespace shapecx;

TEST_SUITE_BEGIN("fft");

TEST_CASE("impulse at the origin gives a flat unit spectrum") {
    Mask m("impulse");
    m.at(0, 0) = 1.0f;
    const auto spec = fft2d(m);
    for (const auto& c : spec) {
        CHECK(c.real() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(c.imag()) < 1e-12);
    }
}

TEST_CASE("constant image concentrates at DC") {
    Mask m("ones");
    for (auto& v : m.pixels) v = 1.0f;
    const auto spec = fft2d(m);
    CHECK(spec[0].real() == doctest::Approx(4096.0).epsilon(1e-12));
    for (size_t i = 1; i < spec.size(); ++i) CHECK(std::abs(spec[i]) < 1e-9);
}

TEST_CASE("fft2d matches the direct DFT oracle on random masks") {
    Rng rng(2024);
    for (int trial = 0; trial < 12; ++trial) {
        Mask m("r");
        for (auto& v : m.pixels) v = rng.bernoulli(0.4) ? 1.0f : 0.0f;
        const auto fast = fft2d(m);
        const auto slow = oracle::dft2d(std::vector<double>(m.pixels.begin(), m.pixels.end()), 64);
        double worst = 0;
        for (size_t i = 0; i < fast.size(); ++i) worst = std::max(worst, std::abs(fast[i] - slow[i]));
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("inverse transform restores the input") {
    Rng rng(5);
    std::vector<Complex> v(64);
    for (auto& c : v) c = Complex(rng.uniform(), rng.uniform());
    std::vector<Complex> w = v;
    fft_pow2(w.data(), 64, false);
    fft_pow2(w.data(), 64, true);
    for (size_t i = 0; i < v.size(); ++i) CHECK(std::abs(v[i] - w[i]) < 1e-12);
}

TEST_CASE("non-power-of-two lengths are rejected") {
    std::vector<Complex> v(12);
    CHECK_THROWS_AS(fft_pow2(v.data(), 12, false), DimensionError);
}

TEST_CASE("constant images score zero") {
    Mask black("b");
    CHECK(fft_complexity(black) == 0.0);
    Mask white("w");
    for (auto& v : white.pixels) v = 1.0f;
    CHECK(fft_complexity(white) == 0.0);
}

TEST_CASE("period-2 checkerboard hits the Nyquist corner: score 1") {
    Mask m("check");
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) m.at(x, y) = static_cast<float>((x + y) % 2);
    CHECK(fft_complexity(m) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("period-2 vertical stripes score 1/sqrt(2)") {
    Mask m("stripes");
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) m.at(x, y) = static_cast<float>(x % 2);
    CHECK(fft_complexity(m) == doctest::Approx(0.70710678).epsilon(1e-6));
    // horizontal stripes score the same by symmetry
    Mask h("hstripes");
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) h.at(x, y) = static_cast<float>(y % 2);
    CHECK(fft_complexity(h) == doctest::Approx(0.70710678).epsilon(1e-6));
}

TEST_CASE("contrast inversion leaves the score exactly unchanged") {
    Rng rng(6);
    for (int trial = 0; trial < 8; ++trial) {
        Mask m("m");
        for (auto& v : m.pixels) v = rng.bernoulli(0.3) ? 1.0f : 0.0f;
        Mask inv("i");
        for (int i = 0; i < kMaskPixels; ++i) inv.pixels[static_cast<size_t>(i)] = 1.0f - m.pixels[static_cast<size_t>(i)];
        const double a = fft_complexity(m);
        const double b = fft_complexity(inv);
        CHECK(std::memcmp(&a, &b, sizeof a) == 0);  // bit-identical
    }
}

TEST_CASE("flips leave the score numerically unchanged") {
    Rng rng(7);
    for (int trial = 0; trial < 6; ++trial) {
        const Mask m = make_star(4 + trial, 0.5, 30, 33, 22, 10.0 * trial, "s");
        const double base = fft_complexity(m);
        CHECK(fft_complexity(hflip(m)) == doctest::Approx(base).epsilon(1e-12));
        CHECK(fft_complexity(vflip(m)) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_SUITE_END();
