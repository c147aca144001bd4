#pragma once

#include "pixforge/image.hpp"

#include <utility>

namespace pixforge {

/// x' = t11 x + t12 y + tx,  y' = t21 x + t22 y + ty.
///
/// Translation is carried as an explicit offset instead of a homogeneous
/// third row. Coordinates are (column, row) with y pointing down the raster.
struct AffineMap {
    double t11 = 1.0, t12 = 0.0;
    double t21 = 0.0, t22 = 1.0;
    double tx = 0.0, ty = 0.0;

    double determinant() const noexcept { return t11 * t22 - t12 * t21; }
    /// Throws ArgumentError when the map is singular.
    AffineMap inverse() const;

    static AffineMap identity() { return {}; }
    /// Counterclockwise by `degrees` in a y-up frame. Multiples of 90° are exact.
    static AffineMap rotation(double degrees);
    static AffineMap scale(double sx, double sy);
    static AffineMap shear(double kx, double ky);
    static AffineMap translation(double dx, double dy);
    enum class Axis { X, Y };
    /// Reflection across the given axis (X: y -> -y, Y: x -> -x).
    static AffineMap reflection(Axis axis);

    friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

/// `outer ∘ inner`: apply inner first.
AffineMap compose(const AffineMap& outer, const AffineMap& inner);

/// Conjugate `m` so it acts about (cx, cy) instead of the origin.
AffineMap about_point(const AffineMap& m, double cx, double cy);

/// Rotation about the centre of a width×height raster that turns the picture
/// counterclockwise on screen (the raster's y axis points down).
AffineMap center_rotation(double degrees, int width, int height);

std::pair<double, double> apply_coords(const AffineMap& m, double x, double y);

enum class InterpMode { Nearest, Bilinear };

/// Sample at a real position inside [0, w-1]×[0, h-1]; throws ArgumentError outside.
/// Nearest rounds half up on both axes. Bilinear is linear in x then in y.
double interpolate(const RealImage& img, double x, double y, InterpMode mode);

/// Coefficients (a, b, c, d) of v = a x + b y + c x y + d through the four
/// lattice neighbours of (x, y).
struct BilinearCoefficients {
    double a, b, c, d;
    double operator()(double x, double y) const noexcept { return a * x + b * y + c * x * y + d; }
};
BilinearCoefficients bilinear_coefficients(const RealImage& img, double x, double y);

struct Size {
    int width;
    int height;
};

/// Inverse-mapped warp: each output pixel pulls from m⁻¹(x, y); samples that
/// fall outside the source are filled with 0.
RealImage warp(const RealImage& img, const AffineMap& m, InterpMode mode, Size out_size);
Image warp(const Image& img, const AffineMap& m, InterpMode mode, Size out_size);

/// Resample to a new size with corner-aligned bilinear scaling.
RealImage resize(const RealImage& img, Size out_size);

}  // namespace pixforge
