#include "pixforge/geometry.hpp"

#include "pixforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace pixforge {

namespace {

// Sources that land within this distance outside the raster are pulled back
// onto the border; rotations by non-right angles accumulate this much error.
constexpr double kDomainSlack = 1e-9;

void exact_sincos(double degrees, double& s, double& c) {
    const double turns = degrees / 90.0;
    if (turns == std::floor(turns)) {
        const long q = ((static_cast<long>(turns) % 4) + 4) % 4;
        static constexpr double kSin[4] = {0.0, 1.0, 0.0, -1.0};
        static constexpr double kCos[4] = {1.0, 0.0, -1.0, 0.0};
        s = kSin[q];
        c = kCos[q];
        return;
    }
    const double rad = degrees * std::numbers::pi / 180.0;
    s = std::sin(rad);
    c = std::cos(rad);
}

}  // namespace

AffineMap AffineMap::inverse() const {
    const double det = determinant();
    if (det == 0.0 || !std::isfinite(det)) throw ArgumentError("affine map is singular");
    AffineMap inv;
    inv.t11 = t22 / det;
    inv.t12 = -t12 / det;
    inv.t21 = -t21 / det;
    inv.t22 = t11 / det;
    inv.tx = -(inv.t11 * tx + inv.t12 * ty);
    inv.ty = -(inv.t21 * tx + inv.t22 * ty);
    return inv;
}

AffineMap AffineMap::rotation(double degrees) {
    double s = 0.0, c = 1.0;
    exact_sincos(degrees, s, c);
    AffineMap m;
    m.t11 = c;
    m.t12 = -s;
    m.t21 = s;
    m.t22 = c;
    return m;
}

AffineMap AffineMap::scale(double sx, double sy) {
    if (sx == 0.0 || sy == 0.0) throw ArgumentError("scale factors must be non-zero");
    AffineMap m;
    m.t11 = sx;
    m.t22 = sy;
    return m;
}

AffineMap AffineMap::shear(double kx, double ky) {
    AffineMap m;
    m.t12 = kx;
    m.t21 = ky;
    return m;
}

AffineMap AffineMap::translation(double dx, double dy) {
    AffineMap m;
    m.tx = dx;
    m.ty = dy;
    return m;
}

AffineMap AffineMap::reflection(Axis axis) {
    return axis == Axis::X ? scale(1.0, -1.0) : scale(-1.0, 1.0);
}

AffineMap compose(const AffineMap& outer, const AffineMap& inner) {
    AffineMap m;
    m.t11 = outer.t11 * inner.t11 + outer.t12 * inner.t21;
    m.t12 = outer.t11 * inner.t12 + outer.t12 * inner.t22;
    m.t21 = outer.t21 * inner.t11 + outer.t22 * inner.t21;
    m.t22 = outer.t21 * inner.t12 + outer.t22 * inner.t22;
    m.tx = outer.t11 * inner.tx + outer.t12 * inner.ty + outer.tx;
    m.ty = outer.t21 * inner.tx + outer.t22 * inner.ty + outer.ty;
    return m;
}

AffineMap about_point(const AffineMap& m, double cx, double cy) {
    return compose(AffineMap::translation(cx, cy), compose(m, AffineMap::translation(-cx, -cy)));
}

AffineMap center_rotation(double degrees, int width, int height) {
    // With y down, the y-up counterclockwise matrix turns the picture clockwise.
    return about_point(AffineMap::rotation(-degrees), 0.5 * (width - 1), 0.5 * (height - 1));
}

std::pair<double, double> apply_coords(const AffineMap& m, double x, double y) {
    return {m.t11 * x + m.t12 * y + m.tx, m.t21 * x + m.t22 * y + m.ty};
}

namespace {

bool inside(const RealImage& img, double x, double y) {
    return x >= 0.0 && y >= 0.0 && x <= img.width() - 1 && y <= img.height() - 1;
}

struct Cell {
    int x0, y0, x1, y1;
    double fx, fy;
};

Cell cell_of(const RealImage& img, double x, double y) {
    Cell c;
    c.x0 = static_cast<int>(std::floor(x));
    c.y0 = static_cast<int>(std::floor(y));
    c.x1 = std::min(c.x0 + 1, img.width() - 1);
    c.y1 = std::min(c.y0 + 1, img.height() - 1);
    c.fx = x - c.x0;
    c.fy = y - c.y0;
    return c;
}

}  // namespace

double interpolate(const RealImage& img, double x, double y, InterpMode mode) {
    if (!inside(img, x, y)) {
        throw ArgumentError("interpolation query (" + std::to_string(x) + ", " +
                            std::to_string(y) + ") outside the image");
    }
    if (mode == InterpMode::Nearest) {
        const int nx = std::min(static_cast<int>(std::floor(x + 0.5)), img.width() - 1);
        const int ny = std::min(static_cast<int>(std::floor(y + 0.5)), img.height() - 1);
        return img.at(nx, ny);
    }
    const Cell c = cell_of(img, x, y);
    const double top = img.at(c.x0, c.y0) + c.fx * (img.at(c.x1, c.y0) - img.at(c.x0, c.y0));
    const double bottom = img.at(c.x0, c.y1) + c.fx * (img.at(c.x1, c.y1) - img.at(c.x0, c.y1));
    return top + c.fy * (bottom - top);
}

BilinearCoefficients bilinear_coefficients(const RealImage& img, double x, double y) {
    if (!inside(img, x, y)) throw ArgumentError("bilinear query outside the image");
    const Cell c = cell_of(img, x, y);
    // On the last row/column x1 == x0, so the fit is constant along that axis.
    const double X0 = c.x0, Y0 = c.y0;
    const double v00 = img.at(c.x0, c.y0), v10 = img.at(c.x1, c.y0);
    const double v01 = img.at(c.x0, c.y1), v11 = img.at(c.x1, c.y1);
    // In local coordinates u = x - X0, w = y - Y0 the fit is
    // v = v00 + (v10 - v00) u + (v01 - v00) w + (v11 - v10 - v01 + v00) u w.
    const double du = v10 - v00, dw = v01 - v00, duw = v11 - v10 - v01 + v00;
    BilinearCoefficients k;
    k.c = duw;
    k.a = du - duw * Y0;
    k.b = dw - duw * X0;
    k.d = v00 - du * X0 - dw * Y0 + duw * X0 * Y0;
    return k;
}

RealImage warp(const RealImage& img, const AffineMap& m, InterpMode mode, Size out_size) {
    const AffineMap inv = m.inverse();
    RealImage out(out_size.width, out_size.height);
    const double xmax = img.width() - 1, ymax = img.height() - 1;
    for (int y = 0; y < out_size.height; ++y) {
        for (int x = 0; x < out_size.width; ++x) {
            auto [sx, sy] = apply_coords(inv, x, y);
            if (sx < -kDomainSlack || sy < -kDomainSlack || sx > xmax + kDomainSlack ||
                sy > ymax + kDomainSlack) {
                continue;
            }
            sx = std::clamp(sx, 0.0, xmax);
            sy = std::clamp(sy, 0.0, ymax);
            out.at(x, y) = interpolate(img, sx, sy, mode);
        }
    }
    return out;
}

Image warp(const Image& img, const AffineMap& m, InterpMode mode, Size out_size) {
    std::vector<RealImage> planes;
    planes.reserve(static_cast<std::size_t>(img.channels()));
    for (int c = 0; c < img.channels(); ++c) {
        planes.push_back(warp(channel_plane(img, c), m, mode, out_size));
    }
    return from_planes(planes);
}

RealImage resize(const RealImage& img, Size out_size) {
    if (out_size.width < 1 || out_size.height < 1) throw ShapeError("resize to an empty size");
    const double sx = out_size.width > 1 && img.width() > 1
                          ? static_cast<double>(out_size.width - 1) / (img.width() - 1)
                          : 1.0;
    const double sy = out_size.height > 1 && img.height() > 1
                          ? static_cast<double>(out_size.height - 1) / (img.height() - 1)
                          : 1.0;
    return warp(img, AffineMap::scale(sx, sy), InterpMode::Bilinear, out_size);
}

}  // namespace pixforge
