#include "pixforge/spectral.hpp"

#include "pixforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pixforge {

using cplx = std::complex<double>;

SpectralPlane::SpectralPlane(int width, int height)
    : SpectralPlane(width, height,
                    std::vector<cplx>(static_cast<std::size_t>(std::max(width, 0)) *
                                      static_cast<std::size_t>(std::max(height, 0)))) {}

SpectralPlane::SpectralPlane(int width, int height, std::vector<cplx> coeffs)
    : width_(width), height_(height), coeffs_(std::move(coeffs)) {
    if (width < 1 || height < 1) throw ShapeError("spectral plane dimensions must be positive");
    if (coeffs_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw ShapeError("spectral plane coefficient count does not match its dimensions");
    }
}

namespace {

constexpr double kImagTolerance = 1e-6;

// Twiddle table e^{sign·2πi k/n}, k in [0, n).
std::vector<cplx> twiddles(int n, double sign) {
    std::vector<cplx> w(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        w[static_cast<std::size_t>(k)] = std::polar(1.0, sign * 2.0 * std::numbers::pi * k / n);
    }
    return w;
}

// In-place direct DFT of a strided line (unnormalised).
void dft_line(cplx* data, int n, std::size_t stride, const std::vector<cplx>& w,
              std::vector<cplx>& scratch) {
    scratch.assign(static_cast<std::size_t>(n), cplx{});
    for (int k = 0; k < n; ++k) {
        cplx acc{};
        for (int j = 0; j < n; ++j) {
            const auto idx = static_cast<std::size_t>((static_cast<long>(k) * j) % n);
            acc += data[static_cast<std::size_t>(j) * stride] * w[idx];
        }
        scratch[static_cast<std::size_t>(k)] = acc;
    }
    for (int k = 0; k < n; ++k) data[static_cast<std::size_t>(k) * stride] = scratch[static_cast<std::size_t>(k)];
}

// Iterative radix-2 Cooley-Tukey on a strided line (unnormalised).
void fft_line(cplx* data, int n, std::size_t stride, const std::vector<cplx>& w,
              std::vector<cplx>& buf) {
    buf.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) buf[static_cast<std::size_t>(i)] = data[static_cast<std::size_t>(i) * stride];
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(buf[static_cast<std::size_t>(i)], buf[static_cast<std::size_t>(j)]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const int step = n / len;
        for (int i = 0; i < n; i += len) {
            for (int k = 0; k < len / 2; ++k) {
                const cplx t = w[static_cast<std::size_t>(k * step)] *
                               buf[static_cast<std::size_t>(i + k + len / 2)];
                const cplx u = buf[static_cast<std::size_t>(i + k)];
                buf[static_cast<std::size_t>(i + k)] = u + t;
                buf[static_cast<std::size_t>(i + k + len / 2)] = u - t;
            }
        }
    }
    for (int i = 0; i < n; ++i) data[static_cast<std::size_t>(i) * stride] = buf[static_cast<std::size_t>(i)];
}

using LineTransform = void (*)(cplx*, int, std::size_t, const std::vector<cplx>&, std::vector<cplx>&);

// Apply a 1-D transform to every row, then every column, and scale by 1/√(MN).
void separable(std::vector<cplx>& a, int m, int n, double sign, LineTransform line) {
    const auto wx = twiddles(m, sign);
    const auto wy = twiddles(n, sign);
    std::vector<cplx> scratch;
    for (int y = 0; y < n; ++y) line(a.data() + static_cast<std::size_t>(y) * m, m, 1, wx, scratch);
    for (int x = 0; x < m; ++x) line(a.data() + x, n, static_cast<std::size_t>(m), wy, scratch);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m) * static_cast<double>(n));
    for (auto& c : a) c *= scale;
}

std::vector<cplx> to_complex(const RealImage& img) {
    return std::vector<cplx>(img.data().begin(), img.data().end());
}

RealImage to_real(const std::vector<cplx>& a, int m, int n) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i].imag()) >= kImagTolerance) {
            throw NumericError("inverse transform left an imaginary residue of " +
                               std::to_string(std::abs(a[i].imag())) +
                               "; the spectrum is not that of a real image");
        }
        out[i] = a[i].real();
    }
    return RealImage(m, n, std::move(out));
}

void require_pow2(int m, int n) {
    if (!is_power_of_two(m) || !is_power_of_two(n)) {
        throw ShapeError("fft needs power-of-two dimensions, got " + std::to_string(m) + "x" +
                         std::to_string(n));
    }
}

}  // namespace

SpectralPlane dft2(const RealImage& img) {
    auto a = to_complex(img);
    separable(a, img.width(), img.height(), -1.0, dft_line);
    return SpectralPlane(img.width(), img.height(), std::move(a));
}

RealImage idft2(const SpectralPlane& sp) {
    auto a = sp.coeffs();
    separable(a, sp.width(), sp.height(), +1.0, dft_line);
    return to_real(a, sp.width(), sp.height());
}

SpectralPlane fft2(const RealImage& img) {
    require_pow2(img.width(), img.height());
    auto a = to_complex(img);
    separable(a, img.width(), img.height(), -1.0, fft_line);
    return SpectralPlane(img.width(), img.height(), std::move(a));
}

RealImage ifft2(const SpectralPlane& sp) {
    require_pow2(sp.width(), sp.height());
    auto a = sp.coeffs();
    separable(a, sp.width(), sp.height(), +1.0, fft_line);
    return to_real(a, sp.width(), sp.height());
}

bool is_power_of_two(int n) noexcept { return n > 0 && (n & (n - 1)) == 0; }

int next_power_of_two(int n) noexcept {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

SpectralPlane lowpass(const SpectralPlane& sp, double radius_frac) {
    if (!(radius_frac > 0.0 && radius_frac <= 1.0)) {
        throw ArgumentError("low-pass radius fraction must lie in (0, 1]");
    }
    const int m = sp.width(), n = sp.height();
    // Scaled to the farthest centred frequency, so a fraction of 1 keeps everything.
    const double radius = radius_frac * std::hypot(m / 2.0, n / 2.0);
    SpectralPlane out = sp;
    for (int v = 0; v < n; ++v) {
        const double fv = v > n / 2 ? v - n : v;
        for (int u = 0; u < m; ++u) {
            const double fu = u > m / 2 ? u - m : u;
            if (std::hypot(fu, fv) > radius) out.at(u, v) = cplx{};
        }
    }
    return out;
}

Image spectrum_image(const SpectralPlane& sp) {
    const int m = sp.width(), n = sp.height();
    RealImage g(m, n);
    double peak = 0.0;
    for (int v = 0; v < n; ++v) {
        for (int u = 0; u < m; ++u) {
            const double val = std::log1p(std::abs(sp.at(u, v)));
            g.at((u + m / 2) % m, (v + n / 2) % n) = val;
            peak = std::max(peak, val);
        }
    }
    if (peak > 0.0) {
        for (auto& val : g.data()) val = 255.0 * val / peak;
    }
    return from_plane(g);
}

std::string spectrum_csv(const SpectralPlane& sp) {
    std::ostringstream os;
    os.precision(17);
    os << "u,v,re,im\n";
    for (int v = 0; v < sp.height(); ++v) {
        for (int u = 0; u < sp.width(); ++u) {
            os << u << ',' << v << ',' << sp.at(u, v).real() << ',' << sp.at(u, v).imag() << '\n';
        }
    }
    return os.str();
}

RealImage lowpass_filter(const RealImage& img, double radius_frac) {
    const int m = next_power_of_two(img.width());
    const int n = next_power_of_two(img.height());
    RealImage padded(m, n);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) padded.at(x, y) = img.at(x, y);
    }
    const RealImage filtered = ifft2(lowpass(fft2(padded), radius_frac));
    RealImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) out.at(x, y) = filtered.at(x, y);
    }
    return out;
}

}  // namespace pixforge
