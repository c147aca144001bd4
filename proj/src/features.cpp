#include "pixforge/features.hpp"

#include "pixforge/error.hpp"
#include "pixforge/filter.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace pixforge {

namespace {

void require_gray(const Image& img, const char* who) {
    if (img.channels() != 1) throw ArgumentError(std::string(who) + " needs a grayscale image");
}

std::vector<Corner> threshold_maxima(const ResponseMap& r, double frac, int radius) {
    double peak = 0.0;
    for (double v : r.data()) peak = std::max(peak, v);
    if (peak <= 0.0) return {};
    return local_maxima(r, radius, frac * peak);
}

}  // namespace

ResponseMap moravec_response(const Image& img, int window, bool eight_offsets) {
    require_gray(img, "moravec");
    if (window < 3 || window % 2 == 0) throw ArgumentError("moravec window must be odd and >= 3");
    if (window > img.width() || window > img.height()) {
        throw ArgumentError("moravec window is larger than the image");
    }
    static constexpr std::array<std::array<int, 2>, 8> kOffsets = {
        {{1, 0}, {0, 1}, {1, 1}, {-1, 1}, {-1, 0}, {0, -1}, {-1, -1}, {1, -1}}};
    const std::size_t offset_count = eight_offsets ? 8 : 4;

    const int w = img.width(), h = img.height();
    const auto px = [&](int x, int y) -> double {
        return img.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
    };
    const int half = window / 2;
    ResponseMap f(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t o = 0; o < offset_count; ++o) {
                const int du = kOffsets[o][0], dv = kOffsets[o][1];
                double e = 0.0;
                for (int j = -half; j <= half; ++j) {
                    for (int i = -half; i <= half; ++i) {
                        const double d = px(x + i + du, y + j + dv) - px(x + i, y + j);
                        e += d * d;
                    }
                }
                best = std::min(best, e);
            }
            f.at(x, y) = best;
        }
    }
    return f;
}

std::vector<Corner> moravec(const Image& img, const MoravecOptions& opts) {
    return threshold_maxima(moravec_response(img, opts.window, opts.eight_offsets),
                            opts.threshold_frac, opts.nms_radius);
}

StructureTensor structure_tensor(const Image& img, double sigma) {
    require_gray(img, "harris");
    const Kernel g = gaussian_kernel(sigma);
    const Gradient d = gradient(channel_plane(img, 0));
    const int w = img.width(), h = img.height();
    RealImage xx(w, h), xy(w, h), yy(w, h);
    for (std::size_t i = 0; i < xx.size(); ++i) {
        const double gx = d.gx.data()[i], gy = d.gy.data()[i];
        xx.data()[i] = gx * gx;
        xy.data()[i] = gx * gy;
        yy.data()[i] = gy * gy;
    }
    return {convolve(xx, g, BorderMode::ClampToEdge), convolve(xy, g, BorderMode::ClampToEdge),
            convolve(yy, g, BorderMode::ClampToEdge)};
}

ResponseMap harris_response(const Image& img, double sigma, double k) {
    const StructureTensor n = structure_tensor(img, sigma);
    ResponseMap q(img.width(), img.height());
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double a = n.ixx.data()[i], b = n.ixy.data()[i], c = n.iyy.data()[i];
        const double tr = a + c;
        q.data()[i] = a * c - b * b - k * tr * tr;
    }
    return q;
}

std::vector<Corner> harris(const Image& img, const HarrisOptions& opts) {
    if (!(opts.sigma > 0.0)) throw ArgumentError("harris sigma must be positive");
    return threshold_maxima(harris_response(img, opts.sigma, opts.k), opts.threshold_frac,
                            opts.nms_radius);
}

std::vector<Corner> local_maxima(const ResponseMap& map, int radius, double min_value) {
    if (radius < 1) throw ArgumentError("non-maximum suppression radius must be >= 1");
    const int w = map.width(), h = map.height();
    std::vector<Corner> out;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double v = map.at(x, y);
            if (!(v > 0.0) || v < min_value) continue;
            bool keep = true;
            for (int j = std::max(0, y - radius); keep && j <= std::min(h - 1, y + radius); ++j) {
                for (int i = std::max(0, x - radius); i <= std::min(w - 1, x + radius); ++i) {
                    const double q = map.at(i, j);
                    // Ties go to the earlier position in (y, x) order.
                    const bool earlier = j < y || (j == y && i < x);
                    if (q > v || (q == v && earlier)) {
                        keep = false;
                        break;
                    }
                }
            }
            if (keep) out.push_back({x, y, v});
        }
    }
    return out;
}

Image annotate_corners(const Image& img, const std::vector<Corner>& corners) {
    Image out = img;
    for (const auto& c : corners) {
        for (int d = -1; d <= 1; ++d) {
            for (const auto [x, y] : {std::array{c.x + d, c.y}, std::array{c.x, c.y + d}}) {
                if (x < 0 || y < 0 || x >= out.width() || y >= out.height()) continue;
                for (int ch = 0; ch < out.channels(); ++ch) out.at(x, y, ch) = 255;
            }
        }
    }
    return out;
}

}  // namespace pixforge
