#include <doctest.h>

#include "oracles.hpp"
#include "pixforge/error.hpp"
#include "pixforge/spectral.hpp"

#include <numbers>
#include <random>

using namespace pixforge;

namespace {

double energy(const RealImage& f) {
    double e = 0.0;
    for (double v : f.data()) e += v * v;
    return e;
}

double energy(const SpectralPlane& t) {
    double e = 0.0;
    for (auto c : t.coeffs()) e += std::norm(c);
    return e;
}

double max_diff(const SpectralPlane& a, const SpectralPlane& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.coeffs()[i] - b.coeffs()[i]));
    return m;
}

}  // namespace

TEST_CASE("dft2 closed forms") {
    const SpectralPlane c = dft2(RealImage(6, 4, 2.5));
    CHECK(std::abs(c.at(0, 0) - std::complex<double>(2.5 * std::sqrt(24.0), 0)) < 1e-9);
    for (int v = 0; v < 4; ++v) {
        for (int u = 0; u < 6; ++u) {
            if (u || v) CHECK(std::abs(c.at(u, v)) < 1e-9);
        }
    }
    RealImage impulse(5, 3);
    impulse.at(0, 0) = 1.0;
    const SpectralPlane ti = dft2(impulse);
    for (auto t : ti.coeffs()) CHECK(std::abs(std::abs(t) - 1.0 / std::sqrt(15.0)) < 1e-12);
    CHECK(dft2(RealImage(1, 1, 7.0)).at(0, 0) == std::complex<double>(7.0, 0.0));
    CHECK(fft2(RealImage(1, 1, 7.0)).at(0, 0) == std::complex<double>(7.0, 0.0));
}

TEST_CASE("dft2 equals the literal quadruple sum") {
    std::mt19937_64 rng(31);
    for (auto [w, h] : {std::pair{8, 8}, std::pair{5, 7}, std::pair{3, 1}}) {
        const RealImage f = oracle::random_plane(rng, w, h, -1, 1);
        const SpectralPlane got = dft2(f);
        const SpectralPlane want(w, h, oracle::literal_dft(f));
        CHECK(max_diff(got, want) < 1e-10);
    }
}

TEST_CASE("inverse, Parseval and conjugate symmetry") {
    std::mt19937_64 rng(32);
    const RealImage f = oracle::random_plane(rng, 16, 16);
    const SpectralPlane t = dft2(f);
    const RealImage back = idft2(t);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(back.data()[i] - f.data()[i]) < 1e-9);
    CHECK(std::abs(energy(f) - energy(t)) / energy(f) < 1e-8);
    for (int v = 0; v < 16; ++v) {
        for (int u = 0; u < 16; ++u) {
            CHECK(std::abs(t.at(u, v) - std::conj(t.at((16 - u) % 16, (16 - v) % 16))) < 1e-10);
        }
    }

    CHECK(idft2(SpectralPlane(4, 4)) == RealImage(4, 4, 0.0));
    SpectralPlane dc(4, 4);
    dc.at(0, 0) = 4.0;
    const RealImage ones = idft2(dc);
    for (double v : ones.data()) CHECK(std::abs(v - 1.0) < 1e-12);

    SpectralPlane bad(4, 4);
    bad.at(1, 0) = 1.0;
    CHECK_THROWS_AS(idft2(bad), NumericError);
}

TEST_CASE("fft2 agrees with dft2 on power-of-two sizes") {
    std::mt19937_64 rng(33);
    for (int w = 1; w <= 64; w *= 2) {
        for (int h : {1, 2, 8, 32}) {
            const RealImage f = oracle::random_plane(rng, w, h);
            CHECK(max_diff(fft2(f), dft2(f)) < 1e-9);
            const RealImage back = ifft2(fft2(f));
            for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(back.data()[i] - f.data()[i]) < 1e-9);
        }
    }
    CHECK_THROWS_AS(fft2(RealImage(6, 8)), ShapeError);
    CHECK_THROWS_AS(ifft2(SpectralPlane(8, 3)), ShapeError);
    CHECK(next_power_of_two(5) == 8);
    CHECK(next_power_of_two(8) == 8);
    CHECK(is_power_of_two(1));
    CHECK_FALSE(is_power_of_two(12));
}

TEST_CASE("low-pass filtering") {
    std::mt19937_64 rng(34);
    const RealImage f = oracle::random_plane(rng, 8, 8);
    const SpectralPlane t = fft2(f);
    CHECK(max_diff(lowpass(t, 1.0), t) == 0.0);
    CHECK_THROWS_AS(lowpass(t, 0.0), ArgumentError);
    CHECK_THROWS_AS(lowpass(t, 1.5), ArgumentError);

    // Radius 0.2 * hypot(4, 4) ≈ 1.13 keeps DC and the four axis neighbours.
    const SpectralPlane narrow = lowpass(t, 0.2);
    CHECK(narrow.at(0, 0) == t.at(0, 0));
    CHECK(narrow.at(1, 0) == t.at(1, 0));
    CHECK(narrow.at(7, 0) == t.at(7, 0));
    CHECK(narrow.at(0, 7) == t.at(0, 7));
    CHECK(narrow.at(2, 0) == std::complex<double>(0, 0));
    CHECK(narrow.at(1, 1) == std::complex<double>(0, 0));
    // The diagonal Nyquist corner is the last coefficient to go.
    CHECK(lowpass(t, 0.999).at(4, 4) == std::complex<double>(0, 0));
    CHECK(lowpass(t, 0.999).at(4, 3) == t.at(4, 3));

    const RealImage flat(16, 8, 40.0);
    const RealImage kept = lowpass_filter(flat, 0.3);
    for (double v : kept.data()) CHECK(std::abs(v - 40.0) < 1e-9);

    RealImage step(16, 16);
    for (int y = 0; y < 16; ++y) {
        for (int x = 8; x < 16; ++x) step.at(x, y) = 255.0;
    }
    const RealImage blurred = lowpass_filter(step, 0.25);
    CHECK(energy(blurred) <= energy(step) + 1e-6);
    bool rings = false;
    for (double v : blurred.data()) rings = rings || v < -1e-6 || v > 255.0 + 1e-6;
    CHECK(rings);
}

TEST_CASE("spectrum display") {
    const Image flat = spectrum_image(fft2(RealImage(8, 8, 5.0)));
    CHECK(flat.width() == 8);
    CHECK(flat.at(4, 4) == 255);
    int lit = 0;
    for (auto v : flat.data()) lit += v != 0;
    CHECK(lit == 1);

    RealImage wave(16, 16);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) wave.at(x, y) = std::cos(2 * std::numbers::pi * 3 * x / 16.0);
    }
    const Image s = spectrum_image(fft2(wave));
    CHECK(s.at(8 + 3, 8) == 255);
    CHECK(s.at(8 - 3, 8) == 255);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            if (y != 8 || (x != 5 && x != 11)) CHECK(s.at(x, y) < 5);
        }
    }

    const std::string csv = spectrum_csv(SpectralPlane(2, 1, {{1, 0}, {0, -2}}));
    CHECK(csv == "u,v,re,im\n0,0,1,0\n1,0,0,-2\n");
}
