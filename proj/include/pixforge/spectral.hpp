#pragma once

#include "pixforge/image.hpp"

#include <complex>
#include <string>
#include <vector>

namespace pixforge {

/// M×N transform coefficients T(u, v), row-major with u along the width.
class SpectralPlane {
public:
    SpectralPlane(int width, int height);
    SpectralPlane(int width, int height, std::vector<std::complex<double>> coeffs);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return coeffs_.size(); }

    std::complex<double> at(int u, int v) const { return coeffs_[index(u, v)]; }
    std::complex<double>& at(int u, int v) { return coeffs_[index(u, v)]; }

    const std::vector<std::complex<double>>& coeffs() const noexcept { return coeffs_; }
    std::vector<std::complex<double>>& coeffs() noexcept { return coeffs_; }

private:
    std::size_t index(int u, int v) const noexcept {
        return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(u);
    }

    int width_;
    int height_;
    std::vector<std::complex<double>> coeffs_;
};

/// T(u,v) = Σ f(x,y) e^{-2πi(ux/M + vy/N)} / √(MN), evaluated one axis at a time.
SpectralPlane dft2(const RealImage& img);
/// Unitary inverse. Throws NumericError when an output keeps an imaginary
/// part of 1e-6 or more, which means the spectrum was not that of a real image.
RealImage idft2(const SpectralPlane& sp);

/// Radix-2 row/column FFT with the same unitary scaling as dft2.
/// Both sides must be powers of two.
SpectralPlane fft2(const RealImage& img);
RealImage ifft2(const SpectralPlane& sp);

bool is_power_of_two(int n) noexcept;
int next_power_of_two(int n) noexcept;

/// Ideal disc low-pass: zero every coefficient whose centred frequency lies
/// farther than radius_frac · hypot(M/2, N/2) from DC.
SpectralPlane lowpass(const SpectralPlane& sp, double radius_frac);

/// log(1 + |T|) with DC shifted to the centre, scaled to [0, 255].
Image spectrum_image(const SpectralPlane& sp);

/// "u,v,re,im" rows.
std::string spectrum_csv(const SpectralPlane& sp);

/// Zero-pad to powers of two, low-pass through the FFT, crop back.
RealImage lowpass_filter(const RealImage& img, double radius_frac);

}  // namespace pixforge
