#pragma once

#include "pixforge/image.hpp"

#include <vector>

namespace pixforge {

/// Per-pixel corner strength, same size as the source image.
using ResponseMap = RealImage;

struct Corner {
    int x;
    int y;
    double score;
    friend bool operator==(const Corner&, const Corner&) = default;
};

/// Gaussian-smoothed gradient outer products, one entry per pixel.
struct StructureTensor {
    RealImage ixx;
    RealImage ixy;
    RealImage iyy;
};

struct MoravecOptions {
    int window = 3;
    double threshold_frac = 0.1;
    int nms_radius = 3;
    /// Also use the four opposite offsets.
    bool eight_offsets = false;
};

struct HarrisOptions {
    double sigma = 1.0;
    double k = 0.05;
    double threshold_frac = 0.01;
    int nms_radius = 3;
};

/// F(x, y) = min over offsets of Σ_window (f(p + d) − f(p))², clamped borders.
ResponseMap moravec_response(const Image& img, int window, bool eight_offsets = false);
std::vector<Corner> moravec(const Image& img, const MoravecOptions& opts = {});

StructureTensor structure_tensor(const Image& img, double sigma);
/// Q = det(Ñ) − k · trace(Ñ)².
ResponseMap harris_response(const Image& img, double sigma, double k);
std::vector<Corner> harris(const Image& img, const HarrisOptions& opts = {});

/// Pixels that dominate their Chebyshev neighbourhood, are ≥ min_value and
/// strictly positive. Among equal values the smallest (y, x) wins.
/// Results come back in (y, x) order.
std::vector<Corner> local_maxima(const ResponseMap& map, int radius, double min_value);

/// Copy of `img` with a 3×3 cross drawn at each corner (255 on every channel).
Image annotate_corners(const Image& img, const std::vector<Corner>& corners);

}  // namespace pixforge
