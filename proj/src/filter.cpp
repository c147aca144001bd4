#include "pixforge/filter.hpp"

#include "pixforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace pixforge {

Kernel::Kernel(int width, int height, std::vector<double> coeffs)
    : width_(width), height_(height), coeffs_(std::move(coeffs)) {
    if (width < 1 || height < 1 || width % 2 == 0 || height % 2 == 0) {
        throw ArgumentError("kernel sides must be odd and positive, got " + std::to_string(width) +
                            "x" + std::to_string(height));
    }
    if (coeffs_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw ShapeError("kernel needs " + std::to_string(width * height) + " coefficients, got " +
                         std::to_string(coeffs_.size()));
    }
    for (double v : coeffs_) {
        if (!std::isfinite(v)) throw ArgumentError("kernel coefficient is not finite");
    }
}

double Kernel::sum() const noexcept {
    return std::accumulate(coeffs_.begin(), coeffs_.end(), 0.0);
}

Kernel Kernel::flipped() const {
    return Kernel(width_, height_, std::vector<double>(coeffs_.rbegin(), coeffs_.rend()));
}

RealImage convolve(const RealImage& img, const Kernel& k, BorderMode border) {
    const int w = img.width(), h = img.height();
    const int a = k.half_width(), b = k.half_height();
    RealImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int t = -b; t <= b; ++t) {
                int sy = y - t;
                if (sy < 0 || sy >= h) {
                    if (border == BorderMode::ZeroPad) continue;
                    sy = std::clamp(sy, 0, h - 1);
                }
                for (int s = -a; s <= a; ++s) {
                    int sx = x - s;
                    if (sx < 0 || sx >= w) {
                        if (border == BorderMode::ZeroPad) continue;
                        sx = std::clamp(sx, 0, w - 1);
                    }
                    acc += k.at(s, t) * img.at(sx, sy);
                }
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

Kernel mean_kernel(int n) {
    if (n < 1 || n % 2 == 0) throw ArgumentError("mean kernel size must be odd and positive");
    const auto count = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    return Kernel(n, n, std::vector<double>(count, 1.0 / static_cast<double>(count)));
}

Kernel gaussian_kernel(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw ArgumentError("gaussian sigma must be positive");
    }
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    const int side = 2 * r + 1;
    std::vector<double> c;
    c.reserve(static_cast<std::size_t>(side) * static_cast<std::size_t>(side));
    for (int t = -r; t <= r; ++t) {
        for (int s = -r; s <= r; ++s) c.push_back(std::exp(-(s * s + t * t) / (2.0 * sigma * sigma)));
    }
    const double total = std::accumulate(c.begin(), c.end(), 0.0);
    for (auto& v : c) v /= total;
    return Kernel(side, side, std::move(c));
}

Kernel sobel_x() {
    // Convolution orientation: responds positively to intensity increasing with x.
    return Kernel(3, 3, {1, 0, -1, 2, 0, -2, 1, 0, -1});
}

Kernel sobel_y() {
    return Kernel(3, 3, {1, 2, 1, 0, 0, 0, -1, -2, -1});
}

Kernel parse_kernel(const std::string& text) {
    std::istringstream in(text);
    int w = 0, h = 0;
    if (!(in >> w >> h)) throw ArgumentError("kernel text must start with \"W H\"");
    if (w < 1 || h < 1) throw ArgumentError("kernel sides must be positive");
    std::vector<double> c;
    double v = 0.0;
    while (in >> v) c.push_back(v);
    if (!in.eof()) throw ArgumentError("kernel coefficients must be real numbers");
    return Kernel(w, h, std::move(c));
}

Kernel read_kernel_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_kernel(ss.str());
}

Gradient gradient(const RealImage& img) {
    const int w = img.width(), h = img.height();
    if (w < 3 || h < 3) throw ShapeError("gradient needs an image of at least 3x3");
    Gradient g{RealImage(w, h), RealImage(w, h)};
    for (int y = 0; y < h; ++y) {
        const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
            g.gx.at(x, y) = 0.5 * (img.at(xp, y) - img.at(xm, y));
            g.gy.at(x, y) = 0.5 * (img.at(x, yp) - img.at(x, ym));
        }
    }
    return g;
}

Image edge_magnitude(const Image& img, double threshold) {
    if (img.channels() != 1) throw ArgumentError("edge detection needs a grayscale image");
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw ArgumentError("edge threshold must lie in [0, 1]");
    }
    const Gradient g = gradient(channel_plane(img, 0));
    RealImage mag(img.width(), img.height());
    double peak = 0.0;
    for (std::size_t i = 0; i < mag.size(); ++i) {
        const double m = std::hypot(g.gx.data()[i], g.gy.data()[i]);
        mag.data()[i] = m;
        peak = std::max(peak, m);
    }
    Image out(img.width(), img.height(), 1);
    if (peak == 0.0) return out;
    for (std::size_t i = 0; i < mag.size(); ++i) {
        out.data()[i] = mag.data()[i] / peak >= threshold ? 255 : 0;
    }
    return out;
}

}  // namespace pixforge
