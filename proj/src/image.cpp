#include "pixforge/image.hpp"

#include "pixforge/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace pixforge {

namespace {

void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
        throw ShapeError("image dimensions must be positive, got " + std::to_string(width) +
                         "x" + std::to_string(height));
    }
}

}  // namespace

Image::Image(int width, int height, int channels)
    : Image(width, height, channels,
            std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                      static_cast<std::size_t>(std::max(height, 0)) *
                                      static_cast<std::size_t>(std::max(channels, 0)))) {}

Image::Image(int width, int height, int channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    check_dims(width, height);
    if (channels != 1 && channels != 3) {
        throw ShapeError("images have 1 or 3 channels, got " + std::to_string(channels));
    }
    if (data_.size() != pixel_count() * static_cast<std::size_t>(channels)) {
        throw ShapeError("pixel buffer holds " + std::to_string(data_.size()) +
                         " bytes, dimensions require " +
                         std::to_string(pixel_count() * static_cast<std::size_t>(channels)));
    }
}

RealImage::RealImage(int width, int height, double fill)
    : RealImage(width, height,
                std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                        static_cast<std::size_t>(std::max(height, 0)),
                                    fill)) {}

RealImage::RealImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw ShapeError("real plane holds " + std::to_string(data_.size()) +
                         " values, dimensions require " +
                         std::to_string(static_cast<std::size_t>(width) *
                                        static_cast<std::size_t>(height)));
    }
    for (double v : data_) {
        if (!std::isfinite(v)) throw NumericError("real plane contains a non-finite value");
    }
}

RealImage RealImage::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) throw ShapeError("empty matrix");
    const auto width = rows.front().size();
    std::vector<double> data;
    data.reserve(width * rows.size());
    for (const auto& row : rows) {
        if (row.size() != width) throw ShapeError("ragged matrix rows");
        data.insert(data.end(), row.begin(), row.end());
    }
    return RealImage(static_cast<int>(width), static_cast<int>(rows.size()), std::move(data));
}

std::uint8_t quantize(double v) noexcept {
    if (!(v > 0.0)) return 0;  // also catches NaN
    if (v >= 255.0) return 255;
    return static_cast<std::uint8_t>(std::round(v));
}

RealImage channel_plane(const Image& img, int channel) {
    if (channel < 0 || channel >= img.channels()) {
        throw ArgumentError("channel " + std::to_string(channel) + " out of range for " +
                            std::to_string(img.channels()) + "-channel image");
    }
    RealImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) out.at(x, y) = img.at(x, y, channel);
    }
    return out;
}

Image from_plane(const RealImage& plane) {
    return from_planes(std::span<const RealImage>(&plane, 1));
}

Image from_planes(std::span<const RealImage> planes) {
    if (planes.size() != 1 && planes.size() != 3) {
        throw ShapeError("need 1 or 3 planes, got " + std::to_string(planes.size()));
    }
    const int w = planes[0].width();
    const int h = planes[0].height();
    const int c = static_cast<int>(planes.size());
    Image out(w, h, c);
    for (int k = 0; k < c; ++k) {
        if (planes[k].width() != w || planes[k].height() != h) {
            throw ShapeError("planes differ in size");
        }
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) out.at(x, y, k) = quantize(planes[k].at(x, y));
        }
    }
    return out;
}

Image to_gray(const Image& img) {
    if (img.channels() == 1) return img;
    Image out(img.width(), img.height(), 1);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double luma = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
                                0.114 * img.at(x, y, 2);
            out.at(x, y) = quantize(luma);
        }
    }
    return out;
}

// PNM -----------------------------------------------------------------------

namespace {

class PnmReader {
public:
    PnmReader(std::span<const std::uint8_t> bytes, std::size_t start) : bytes_(bytes), pos_(start) {}

    std::size_t pos() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    std::span<const std::uint8_t> rest() const noexcept { return bytes_.subspan(pos_); }

    // Whitespace and '#' comments may separate header tokens.
    void skip_separators() {
        while (pos_ < bytes_.size()) {
            const auto ch = bytes_[pos_];
            if (ch == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(ch)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long read_uint(const char* what) {
        skip_separators();
        const std::size_t start = pos_;
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000'000L) throw ParseError(std::string(what) + " too large", start);
            ++pos_;
        }
        if (pos_ == start) {
            if (pos_ >= bytes_.size()) {
                throw ParseError(std::string("truncated data: expected ") + what, start);
            }
            throw ParseError(std::string("expected ") + what, start);
        }
        return value;
    }

    void skip_single_whitespace() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw ParseError("expected whitespace before binary payload", pos_);
        }
        ++pos_;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

Image load_pnm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P') throw ParseError("missing PNM magic", 0);
    const char kind = static_cast<char>(bytes[1]);
    if (kind != '2' && kind != '3' && kind != '5' && kind != '6') {
        throw ParseError(std::string("unsupported PNM magic P") + kind, 1);
    }
    const bool ascii = kind == '2' || kind == '3';
    const int channels = (kind == '3' || kind == '6') ? 3 : 1;

    PnmReader in(bytes, 2);
    const std::size_t width_at = in.pos();
    const long width = in.read_uint("width");
    const long height = in.read_uint("height");
    if (width < 1 || height < 1) throw ParseError("image dimensions must be positive", width_at);
    in.skip_separators();
    const std::size_t maxval_at = in.pos();
    const long maxval = in.read_uint("maxval");
    if (maxval != 255) {
        throw ParseError("unsupported maxval " + std::to_string(maxval) + " (only 255)", maxval_at);
    }

    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                              static_cast<std::size_t>(channels);
    std::vector<std::uint8_t> data;
    data.reserve(count);
    if (ascii) {
        for (std::size_t i = 0; i < count; ++i) {
            in.skip_separators();
            const std::size_t at = in.pos();
            const long v = in.read_uint("sample");
            if (v > 255) throw ParseError("sample " + std::to_string(v) + " exceeds maxval", at);
            data.push_back(static_cast<std::uint8_t>(v));
        }
    } else {
        in.skip_single_whitespace();
        if (in.remaining() < count) {
            throw ParseError("truncated payload: need " + std::to_string(count) + " bytes, have " +
                                 std::to_string(in.remaining()),
                             bytes.size());
        }
        const auto payload = in.rest().first(count);
        data.assign(payload.begin(), payload.end());
    }
    return Image(static_cast<int>(width), static_cast<int>(height), channels, std::move(data));
}

std::vector<std::uint8_t> save_pnm(const Image& img, bool ascii) {
    const char kind = img.channels() == 1 ? (ascii ? '2' : '5') : (ascii ? '3' : '6');
    std::string header = std::string("P") + kind + "\n" + std::to_string(img.width()) + " " +
                         std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    if (!ascii) {
        out.insert(out.end(), img.data().begin(), img.data().end());
        return out;
    }
    // One raster row per line.
    const std::size_t row = static_cast<std::size_t>(img.width()) *
                            static_cast<std::size_t>(img.channels());
    std::string body;
    for (std::size_t i = 0; i < img.data().size(); ++i) {
        body += std::to_string(img.data()[i]);
        body += ((i + 1) % row == 0) ? '\n' : ' ';
    }
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

Image read_pnm_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    try {
        return load_pnm(bytes);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what(), e.offset());
    }
}

void write_pnm_file(const std::string& path, const Image& img, bool ascii) {
    const auto bytes = save_pnm(img, ascii);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("short write to " + path);
}

// Point operations and histograms -------------------------------------------

Histogram histogram(const Image& img, int channel) {
    if (channel < 0 || channel >= img.channels()) {
        throw ArgumentError("channel " + std::to_string(channel) + " out of range for " +
                            std::to_string(img.channels()) + "-channel image");
    }
    Histogram h;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) ++h.bins[img.at(x, y, channel)];
    }
    h.total = img.pixel_count();
    return h;
}

std::string histogram_csv(const Histogram& h) {
    std::ostringstream os;
    os << "intensity,count\n";
    for (std::size_t v = 0; v < h.bins.size(); ++v) os << v << ',' << h.bins[v] << '\n';
    return os.str();
}

Image equalize(const Image& img) {
    Image out = img;
    for (int c = 0; c < img.channels(); ++c) {
        const Histogram h = histogram(img, c);
        std::array<std::uint64_t, 256> cdf{};
        std::uint64_t running = 0;
        std::uint64_t cdf_min = 0;
        for (std::size_t v = 0; v < 256; ++v) {
            running += h.bins[v];
            cdf[v] = running;
            if (cdf_min == 0 && h.bins[v] > 0) cdf_min = running;
        }
        // A single occupied level leaves a zero denominator; it maps to 0.
        const double span = static_cast<double>(h.total - cdf_min);
        std::array<std::uint8_t, 256> lut{};
        for (std::size_t v = 0; v < 256; ++v) {
            if (span <= 0.0 || cdf[v] < cdf_min) continue;
            lut[v] = quantize(255.0 * static_cast<double>(cdf[v] - cdf_min) / span);
        }
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) out.at(x, y, c) = lut[img.at(x, y, c)];
        }
    }
    return out;
}

Image point_op(const Image& img, double gain, double bias) {
    if (!std::isfinite(gain) || !std::isfinite(bias)) {
        throw ArgumentError("gain and bias must be finite");
    }
    std::array<std::uint8_t, 256> lut{};
    for (int v = 0; v < 256; ++v) lut[v] = quantize(gain * v + bias);
    Image out = img;
    for (auto& px : out.data()) px = lut[px];
    return out;
}

// Matrix views of images ------------------------------------------------------

RealImage elementwise_product(const RealImage& a, const RealImage& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw ShapeError("elementwise product needs equal dimensions");
    }
    RealImage out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
    return out;
}

RealImage matrix_product(const RealImage& a, const RealImage& b) {
    if (a.width() != b.height()) {
        throw ShapeError("matrix product inner dimensions differ: " + std::to_string(a.width()) +
                         " vs " + std::to_string(b.height()));
    }
    RealImage out(b.width(), a.height());
    for (int i = 0; i < a.height(); ++i) {
        for (int j = 0; j < b.width(); ++j) {
            double acc = 0.0;
            for (int k = 0; k < a.width(); ++k) acc += a.at(k, i) * b.at(j, k);
            out.at(j, i) = acc;
        }
    }
    return out;
}

}  // namespace pixforge
