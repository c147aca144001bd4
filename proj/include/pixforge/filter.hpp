#pragma once

#include "pixforge/image.hpp"

#include <string>
#include <utility>
#include <vector>

namespace pixforge {

/// Odd-sided mask w(s, t), stored row-major with s along x in [-a, a] and
/// t along y in [-b, b].
class Kernel {
public:
    Kernel(int width, int height, std::vector<double> coeffs);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int half_width() const noexcept { return (width_ - 1) / 2; }
    int half_height() const noexcept { return (height_ - 1) / 2; }

    /// w(s, t) with s in [-a, a], t in [-b, b].
    double at(int s, int t) const {
        return coeffs_[static_cast<std::size_t>(t + half_height()) * static_cast<std::size_t>(width_) +
                       static_cast<std::size_t>(s + half_width())];
    }
    const std::vector<double>& coeffs() const noexcept { return coeffs_; }
    double sum() const noexcept;

    /// w(-s, -t): turns convolution into correlation and back.
    Kernel flipped() const;

private:
    int width_;
    int height_;
    std::vector<double> coeffs_;
};

enum class BorderMode { ZeroPad, ClampToEdge };

/// out(x, y) = Σ_s Σ_t w(s, t) f(x - s, y - t), full-size output.
RealImage convolve(const RealImage& img, const Kernel& k, BorderMode border);

Kernel mean_kernel(int n);
/// Side 2·ceil(3σ)+1, normalised to sum 1.
Kernel gaussian_kernel(double sigma);

/// Sobel derivative masks, in convolution orientation. Not used by
/// `gradient`, which takes central differences.
Kernel sobel_x();
Kernel sobel_y();

/// Text form: "W H" then W·H whitespace-separated reals.
Kernel parse_kernel(const std::string& text);
Kernel read_kernel_file(const std::string& path);

struct Gradient {
    RealImage gx;
    RealImage gy;
};

/// Central differences with clamped borders.
Gradient gradient(const RealImage& img);

/// Gradient magnitude, normalised by its maximum and thresholded to {0, 255}.
Image edge_magnitude(const Image& img, double threshold);

}  // namespace pixforge
