#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pixforge {

/// 8-bit raster, row-major, channels interleaved. Channels is 1 (gray) or 3 (RGB).
///
/// Pixel (x, y) is column x, row y. The constructor validates the buffer
/// length, so an Image that exists is always well formed.
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels);
    Image(int width, int height, int channels, std::vector<std::uint8_t> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }
    bool empty() const noexcept { return data_.empty(); }

    std::uint8_t at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }
    std::uint8_t& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }

    std::span<const std::uint8_t> data() const noexcept { return data_; }
    std::span<std::uint8_t> data() noexcept { return data_; }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t index(int x, int y, int c) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) * static_cast<std::size_t>(channels_) +
               static_cast<std::size_t>(c);
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    std::vector<std::uint8_t> data_;
};

/// Single real-valued plane. Also used as a plain dense matrix: at(x, y) is
/// column x of row y, so a width×height RealImage is a height×width matrix.
class RealImage {
public:
    RealImage() = default;
    RealImage(int width, int height, double fill = 0.0);
    RealImage(int width, int height, std::vector<double> data);

    /// Build from nested rows; every row must have the same length.
    static RealImage from_rows(const std::vector<std::vector<double>>& rows);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }

    double at(int x, int y) const { return data_[index(x, y)]; }
    double& at(int x, int y) { return data_[index(x, y)]; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    friend bool operator==(const RealImage&, const RealImage&) = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

struct Histogram {
    std::array<std::uint64_t, 256> bins{};
    std::uint64_t total = 0;
};

// Conversions ---------------------------------------------------------------

/// Round half away from zero, then clamp to [0, 255]. The one quantization
/// rule used wherever reals become pixels.
std::uint8_t quantize(double v) noexcept;

RealImage channel_plane(const Image& img, int channel);
Image from_plane(const RealImage& plane);
/// Interleave equally sized planes into a 1- or 3-channel Image.
Image from_planes(std::span<const RealImage> planes);

/// Luma 0.299 R + 0.587 G + 0.114 B; gray images are returned unchanged.
Image to_gray(const Image& img);

// PNM -----------------------------------------------------------------------

/// Decode P2, P3, P5 or P6 with maxval 255.
Image load_pnm(std::span<const std::uint8_t> bytes);
/// Encode as P2/P3 when ascii, else P5/P6.
std::vector<std::uint8_t> save_pnm(const Image& img, bool ascii = false);

Image read_pnm_file(const std::string& path);
void write_pnm_file(const std::string& path, const Image& img, bool ascii = false);

// Point operations and histograms -------------------------------------------

Histogram histogram(const Image& img, int channel = 0);
/// "intensity,count" header plus 256 rows.
std::string histogram_csv(const Histogram& h);

/// CDF remap with the darkest occupied bin sent to 0. Applied per channel.
Image equalize(const Image& img);

/// clamp(round(gain * v + bias)) on every sample.
Image point_op(const Image& img, double gain, double bias);

// Matrix views of images ------------------------------------------------------

RealImage elementwise_product(const RealImage& a, const RealImage& b);
RealImage matrix_product(const RealImage& a, const RealImage& b);

}  // namespace pixforge
