#include "pixforge/nn.hpp"

#include "pixforge/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

namespace pixforge::nn {

namespace fs = std::filesystem;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::string layer_name(const Layer& layer) {
    return std::visit(overloaded{[](const Dense&) { return "dense"; },
                                 [](const Conv&) { return "conv"; },
                                 [](const MaxPool&) { return "maxpool"; },
                                 [](const Relu&) { return "relu"; },
                                 [](const Flatten&) { return "flatten"; },
                                 [](const Sigmoid&) { return "sigmoid"; }},
                      layer);
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::below(std::size_t n) {
    if (n == 0) throw ArgumentError("Rng::below(0)");
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
        r = engine_();
    } while (r >= limit);
    return static_cast<std::size_t>(r % n);
}

namespace {

std::vector<double> uniform_init(std::size_t count, double bound, Rng& rng) {
    std::vector<double> v(count);
    for (auto& x : v) x = rng.uniform(-bound, bound);
    return v;
}

}  // namespace

Dense make_dense(int out, int in, Rng& rng) {
    const double bound = std::sqrt(6.0 / (in + out));
    return Dense{ag::Tensor::from({out, in}, uniform_init(static_cast<std::size_t>(out) * in, bound, rng)),
                 ag::Tensor::zeros({out})};
}

Conv make_conv(int out_ch, int in_ch, int kh, int kw, int stride, Rng& rng) {
    const double bound = std::sqrt(6.0 / (in_ch * kh * kw + out_ch * kh * kw));
    const auto count = static_cast<std::size_t>(out_ch) * in_ch * kh * kw;
    return Conv{ag::Tensor::from({out_ch, in_ch, kh, kw}, uniform_init(count, bound, rng)),
                ag::Tensor::zeros({out_ch}), stride};
}

// Network ------------------------------------------------------------------------

std::vector<ag::Tensor> Network::parameters() const {
    std::vector<ag::Tensor> out;
    for (const auto& layer : layers_) {
        if (const auto* d = std::get_if<Dense>(&layer)) {
            out.push_back(d->A);
            out.push_back(d->B);
        } else if (const auto* c = std::get_if<Conv>(&layer)) {
            out.push_back(c->filters);
            out.push_back(c->bias);
        }
    }
    return out;
}

ag::Tensor apply_layer(const Layer& layer, const ag::Tensor& x) {
    return std::visit(overloaded{[&](const Dense& d) { return ag::linear(x, d.A, d.B); },
                                 [&](const Conv& c) { return ag::conv2d(x, c.filters, c.bias, c.stride); },
                                 [&](const MaxPool& p) { return ag::maxpool2d(x, p.window, p.stride); },
                                 [&](const Relu&) { return ag::relu(x); },
                                 [&](const Flatten&) {
                                     return ag::reshape(x, {static_cast<int>(x.numel())});
                                 },
                                 [&](const Sigmoid&) { return ag::sigmoid(x); }},
                      layer);
}

ag::Tensor Network::forward(const ag::Tensor& x) const {
    ag::Tensor h = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        try {
            h = apply_layer(layers_[i], h);
        } catch (const ShapeError& e) {
            throw ShapeError("layer " + std::to_string(i) + " (" + layer_name(layers_[i]) + "): " + e.what());
        }
    }
    return h;
}

std::vector<ag::Tensor> Network::forward_until(const ag::Tensor& x, std::size_t last) const {
    if (last >= layers_.size()) {
        throw ArgumentError("layer index " + std::to_string(last) + " out of range for a " +
                            std::to_string(layers_.size()) + "-layer network");
    }
    std::vector<ag::Tensor> outs;
    ag::Tensor h = x;
    for (std::size_t i = 0; i <= last; ++i) {
        try {
            h = apply_layer(layers_[i], h);
        } catch (const ShapeError& e) {
            throw ShapeError("layer " + std::to_string(i) + " (" + layer_name(layers_[i]) + "): " + e.what());
        }
        outs.push_back(h);
    }
    return outs;
}

ag::Shape Network::output_shape(const ag::Shape& input) const {
    ag::Shape s = input;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto fail = [&](const std::string& why) {
            throw ShapeError("layer " + std::to_string(i) + " (" + layer_name(layers_[i]) +
                             "): " + why + " for input " + ag::shape_str(s));
        };
        std::visit(overloaded{[&](const Dense& d) {
                                  if (s.size() != 1 || s[0] != d.A.dim(1)) fail("dense expects " + std::to_string(d.A.dim(1)) + " inputs");
                                  s = {d.A.dim(0)};
                              },
                              [&](const Conv& c) {
                                  if (s.size() != 3 || s[0] != c.filters.dim(1)) fail("channel mismatch");
                                  const int kh = c.filters.dim(2), kw = c.filters.dim(3);
                                  if (s[1] < kh || s[2] < kw) fail("kernel larger than input");
                                  s = {c.filters.dim(0), (s[1] - kh) / c.stride + 1, (s[2] - kw) / c.stride + 1};
                              },
                              [&](const MaxPool& p) {
                                  if (s.size() != 3 || s[1] < p.window || s[2] < p.window) fail("window larger than input");
                                  s = {s[0], (s[1] - p.window) / p.stride + 1, (s[2] - p.window) / p.stride + 1};
                              },
                              [&](const Flatten&) { s = {static_cast<int>(ag::shape_numel(s))}; },
                              [&](const auto&) {}},
                   layers_[i]);
    }
    return s;
}

Network small_cnn(int channels, int height, int width, int classes, std::uint64_t seed) {
    if (classes < 1) throw ArgumentError("need at least one class");
    if (height < 4 || width < 4) throw ShapeError("small_cnn needs inputs of at least 4x4");
    Rng rng(seed);
    std::vector<Layer> layers;
    layers.emplace_back(make_conv(8, channels, 3, 3, 1, rng));
    layers.emplace_back(Relu{});
    layers.emplace_back(MaxPool{2, 2});
    layers.emplace_back(Flatten{});
    const int features = 8 * ((height - 2 - 2) / 2 + 1) * ((width - 2 - 2) / 2 + 1);
    layers.emplace_back(make_dense(classes, features, rng));
    return Network(std::move(layers));
}

bool is_binary(const Network& net, const ag::Shape& input) {
    return ag::shape_numel(net.output_shape(input)) == 1;
}

ag::Tensor logits(const Network& net, const ag::Tensor& x) {
    const auto& layers = net.layers();
    if (!layers.empty() && std::holds_alternative<Sigmoid>(layers.back())) {
        if (layers.size() == 1) return x;
        return net.forward_until(x, layers.size() - 2).back();
    }
    return net.forward(x);
}

ag::Tensor classification_loss(const Network& net, const ag::Tensor& x, int label) {
    const ag::Tensor z = logits(net, x);
    const int labels[1] = {label};
    if (z.numel() == 1) return ag::bce_with_logits(z, labels);
    return ag::softmax_cross_entropy(ag::reshape(z, {static_cast<int>(z.numel())}), labels);
}

std::vector<double> predict(const Network& net, const ag::Tensor& x) {
    const ag::Tensor z = logits(net, x);
    if (z.numel() == 1) {
        const double v = z.values()[0];
        const double p = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
        return {1.0 - p, p};
    }
    return ag::softmax(z.values());
}

std::vector<double> predict(const Network& net, const Image& img) {
    return predict(net, image_tensor(img));
}

ag::Tensor image_tensor(const Image& img) {
    const int c = img.channels(), h = img.height(), w = img.width();
    std::vector<double> v(static_cast<std::size_t>(c) * h * w);
    for (int k = 0; k < c; ++k) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                v[(static_cast<std::size_t>(k) * h + y) * w + x] = img.at(x, y, k) / 255.0;
            }
        }
    }
    return ag::Tensor::from({c, h, w}, std::move(v));
}

Image tensor_image(std::span<const double> values, const ag::Shape& shape) {
    if (shape.size() != 3 || ag::shape_numel(shape) != values.size()) {
        throw ShapeError("image tensors are (C, H, W), got " + ag::shape_str(shape));
    }
    const int c = shape[0], h = shape[1], w = shape[2];
    Image out(w, h, c);
    for (int k = 0; k < c; ++k) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                out.at(x, y, k) = quantize(values[(static_cast<std::size_t>(k) * h + y) * w + x] * 255.0);
            }
        }
    }
    return out;
}

void set_frozen(const Network& net, bool frozen) {
    for (auto p : net.parameters()) p.set_frozen(frozen);
}

// Weights file --------------------------------------------------------------------------

namespace {

constexpr char kMagic[] = "PXFG1";
constexpr std::size_t kMagicLen = 5;

enum class Kind : std::uint8_t { Dense = 1, Conv = 2, MaxPool = 3, Relu = 4, Flatten = 5, Sigmoid = 6 };

class Writer {
public:
    void u8(std::uint8_t v) { out.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double d) {
        const auto bits = std::bit_cast<std::uint64_t>(d);
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    void tensor(const ag::Tensor& t) {
        for (double v : t.values()) f64(v);
    }
    std::vector<std::uint8_t> out;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : bytes(b) {}
    void need(std::size_t n, const char* what) {
        if (bytes.size() - pos < n) throw ParseError(std::string("weights file truncated reading ") + what, pos);
    }
    std::uint8_t u8(const char* what) {
        need(1, what);
        return bytes[pos++];
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos++]) << (8 * i);
        return v;
    }
    double f64() {
        need(8, "parameters");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[pos++]) << (8 * i);
        return std::bit_cast<double>(bits);
    }
    std::vector<double> doubles(std::size_t n) {
        need(n * 8, "parameters");
        std::vector<double> v(n);
        for (auto& d : v) d = f64();
        return v;
    }
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;
};

struct LayerRecord {
    Kind kind;
    std::vector<std::uint32_t> dims;
};

LayerRecord describe(const Layer& layer) {
    return std::visit(
        overloaded{[](const Dense& d) {
                       return LayerRecord{Kind::Dense, {static_cast<std::uint32_t>(d.A.dim(0)),
                                                        static_cast<std::uint32_t>(d.A.dim(1))}};
                   },
                   [](const Conv& c) {
                       std::vector<std::uint32_t> dims;
                       for (int d : c.filters.shape()) dims.push_back(static_cast<std::uint32_t>(d));
                       dims.push_back(static_cast<std::uint32_t>(c.stride));
                       return LayerRecord{Kind::Conv, dims};
                   },
                   [](const MaxPool& p) {
                       return LayerRecord{Kind::MaxPool, {static_cast<std::uint32_t>(p.window),
                                                          static_cast<std::uint32_t>(p.stride)}};
                   },
                   [](const Relu&) { return LayerRecord{Kind::Relu, {}}; },
                   [](const Flatten&) { return LayerRecord{Kind::Flatten, {}}; },
                   [](const Sigmoid&) { return LayerRecord{Kind::Sigmoid, {}}; }},
        layer);
}

void check_magic(Reader& in) {
    if (in.bytes.empty()) throw ParseError("empty weights file", 0);
    in.need(kMagicLen, "magic");
    if (!std::equal(kMagic, kMagic + kMagicLen, in.bytes.begin())) {
        throw ParseError("bad weights magic (expected PXFG1)", 0);
    }
    in.pos = kMagicLen;
}

LayerRecord read_record(Reader& in, std::size_t index) {
    const std::size_t at = in.pos;
    const auto kind = in.u8("layer kind");
    if (kind < 1 || kind > 6) {
        throw ParseError("layer " + std::to_string(index) + ": unknown kind tag " + std::to_string(kind), at);
    }
    const auto ndims = in.u32("dimension count");
    if (ndims > 8) throw ParseError("layer " + std::to_string(index) + ": implausible dimension count", at);
    LayerRecord r{static_cast<Kind>(kind), {}};
    for (std::uint32_t i = 0; i < ndims; ++i) {
        const auto d = in.u32("dimensions");
        if (d == 0 || d > (1u << 24)) throw ParseError("layer " + std::to_string(index) + ": bad dimension", in.pos - 4);
        r.dims.push_back(d);
    }
    return r;
}

void require_dims(const LayerRecord& r, std::size_t n, std::size_t index) {
    if (r.dims.size() != n) {
        throw ParseError("layer " + std::to_string(index) + ": expected " + std::to_string(n) + " dimensions", 0);
    }
}

}  // namespace

std::vector<std::uint8_t> save_weights(const Network& net) {
    Writer w;
    for (std::size_t i = 0; i < kMagicLen; ++i) w.u8(static_cast<std::uint8_t>(kMagic[i]));
    w.u32(static_cast<std::uint32_t>(net.size()));
    for (const auto& layer : net.layers()) {
        const LayerRecord r = describe(layer);
        w.u8(static_cast<std::uint8_t>(r.kind));
        w.u32(static_cast<std::uint32_t>(r.dims.size()));
        for (auto d : r.dims) w.u32(d);
        if (const auto* d = std::get_if<Dense>(&layer)) {
            w.tensor(d->A);
            w.tensor(d->B);
        } else if (const auto* c = std::get_if<Conv>(&layer)) {
            w.tensor(c->filters);
            w.tensor(c->bias);
        }
    }
    return std::move(w.out);
}

void load_weights(Network& net, std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    check_magic(in);
    const auto count = in.u32("layer count");
    if (count != net.size()) {
        throw ShapeError("weights file holds " + std::to_string(count) + " layers, network has " +
                         std::to_string(net.size()));
    }
    // Validate everything before touching the network.
    std::vector<std::vector<double>> staged;
    for (std::size_t i = 0; i < net.size(); ++i) {
        const LayerRecord want = describe(net.layers()[i]);
        const LayerRecord got = read_record(in, i);
        if (got.kind != want.kind || got.dims != want.dims) {
            throw ShapeError("layer " + std::to_string(i) + ": stored " + layer_name(net.layers()[i]) +
                             " layout does not match the network (kind or shape differs)");
        }
        if (const auto* d = std::get_if<Dense>(&net.layers()[i])) {
            staged.push_back(in.doubles(d->A.numel()));
            staged.push_back(in.doubles(d->B.numel()));
        } else if (const auto* c = std::get_if<Conv>(&net.layers()[i])) {
            staged.push_back(in.doubles(c->filters.numel()));
            staged.push_back(in.doubles(c->bias.numel()));
        }
    }
    auto params = net.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) {
        std::copy(staged[k].begin(), staged[k].end(), params[k].mutable_values().begin());
    }
}

Network read_network(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    check_magic(in);
    const auto count = in.u32("layer count");
    if (count > 4096) throw ParseError("implausible layer count", kMagicLen);
    std::vector<Layer> layers;
    for (std::size_t i = 0; i < count; ++i) {
        const LayerRecord r = read_record(in, i);
        const auto dim = [&](std::size_t k) { return static_cast<int>(r.dims[k]); };
        switch (r.kind) {
            case Kind::Dense: {
                require_dims(r, 2, i);
                auto A = in.doubles(r.dims[0] * static_cast<std::size_t>(r.dims[1]));
                auto B = in.doubles(r.dims[0]);
                layers.emplace_back(Dense{ag::Tensor::from({dim(0), dim(1)}, std::move(A)),
                                          ag::Tensor::from({dim(0)}, std::move(B))});
                break;
            }
            case Kind::Conv: {
                require_dims(r, 5, i);
                auto F = in.doubles(static_cast<std::size_t>(r.dims[0]) * r.dims[1] * r.dims[2] * r.dims[3]);
                auto B = in.doubles(r.dims[0]);
                layers.emplace_back(Conv{ag::Tensor::from({dim(0), dim(1), dim(2), dim(3)}, std::move(F)),
                                         ag::Tensor::from({dim(0)}, std::move(B)), dim(4)});
                break;
            }
            case Kind::MaxPool:
                require_dims(r, 2, i);
                layers.emplace_back(MaxPool{dim(0), dim(1)});
                break;
            case Kind::Relu: layers.emplace_back(Relu{}); break;
            case Kind::Flatten: layers.emplace_back(Flatten{}); break;
            case Kind::Sigmoid: layers.emplace_back(Sigmoid{}); break;
        }
    }
    return Network(std::move(layers));
}

void write_network_file(const std::string& path, const Network& net) {
    const auto bytes = save_weights(net);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("short write to " + path);
}

Network read_network_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return read_network(bytes);
}

// Data -----------------------------------------------------------------------------------------

std::vector<Sample> to_samples(const Dataset& ds) {
    std::vector<Sample> out;
    out.reserve(ds.items.size());
    for (const auto& item : ds.items) {
        const ag::Tensor t = image_tensor(item.image);
        out.push_back({t.shape(), std::vector<double>(t.values().begin(), t.values().end()), item.label});
    }
    return out;
}

Split split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    if (ds.items.empty()) throw ArgumentError("cannot split an empty dataset");
    if (!(test_fraction > 0.0 && test_fraction < 0.5)) {
        throw ArgumentError("test fraction must lie in (0, 0.5)");
    }
    const std::size_t n = ds.items.size();
    std::map<int, std::size_t> left_in_train;
    for (const auto& item : ds.items) ++left_in_train[item.label];
    std::size_t splittable = 0;
    for (const auto& [label, count] : left_in_train) splittable += count >= 2;
    // Grows past round(fraction · n) only when that is too small to hold one item per class.
    const auto n_test = std::max<std::size_t>(
        std::max<std::size_t>(1, splittable), static_cast<std::size_t>(std::llround(test_fraction * n)));

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(seed);
    rng.shuffle(perm);

    std::vector<bool> in_test(n, false);
    std::size_t taken = 0;
    const auto take = [&](std::size_t idx) {
        in_test[idx] = true;
        --left_in_train[ds.items[idx].label];
        ++taken;
    };
    // First make sure every class with two or more items is represented.
    std::map<int, bool> represented;
    for (std::size_t idx : perm) {
        const int label = ds.items[idx].label;
        if (taken < n_test && !represented[label] && left_in_train[label] >= 2) {
            represented[label] = true;
            take(idx);
        }
    }
    for (std::size_t idx : perm) {
        if (taken >= n_test) break;
        if (!in_test[idx] && left_in_train[ds.items[idx].label] >= 2) take(idx);
    }
    // Classes with a single item cannot be on both sides; fill from anything.
    for (std::size_t idx : perm) {
        if (taken >= n_test) break;
        if (!in_test[idx] && taken + 1 < n) take(idx);
    }

    Split out{{{}, ds.class_names}, {{}, ds.class_names}};
    for (std::size_t idx : perm) (in_test[idx] ? out.test : out.train).items.push_back(ds.items[idx]);
    return out;
}

Dataset generate_shapes(int n, int size, std::uint64_t seed) {
    if (n < 1) throw ArgumentError("dataset size must be positive");
    if (size < 12) throw ArgumentError("shape images must be at least 12 pixels wide");
    Rng rng(seed);
    Dataset ds{{}, {"circle", "square"}};
    ds.items.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int label = i % 2;
        const double r = rng.uniform(0.2, 0.36) * size;
        const double cx = rng.uniform(r + 0.5, size - 1.5 - r);
        const double cy = rng.uniform(r + 0.5, size - 1.5 - r);
        const double bg = rng.uniform(0.0, 70.0);
        const double fg = rng.uniform(160.0, 255.0);
        Image img(size, size, 1);
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                const double dx = x - cx, dy = y - cy;
                const bool on = label == 0 ? dx * dx + dy * dy <= r * r
                                           : std::abs(dx) <= r && std::abs(dy) <= r;
                img.at(x, y) = quantize((on ? fg : bg) + rng.uniform(-20.0, 20.0));
            }
        }
        ds.items.push_back({std::move(img), label});
    }
    return ds;
}

void write_dataset(const std::string& dir, const Dataset& ds) {
    fs::create_directories(dir);
    std::vector<int> counters(ds.class_names.size(), 0);
    for (const auto& item : ds.items) {
        if (item.label < 0 || static_cast<std::size_t>(item.label) >= ds.class_names.size()) {
            throw ArgumentError("item label outside the class list");
        }
        const fs::path cls = fs::path(dir) / ds.class_names[static_cast<std::size_t>(item.label)];
        fs::create_directories(cls);
        char name[32];
        std::snprintf(name, sizeof name, "%05d.pgm", counters[static_cast<std::size_t>(item.label)]++);
        write_pnm_file((cls / name).string(), item.image);
    }
}

Dataset read_dataset(const std::string& dir) {
    if (!fs::is_directory(dir)) throw Error("dataset directory " + dir + " does not exist");
    Dataset ds;
    std::vector<fs::path> classes;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_directory()) classes.push_back(e.path());
    }
    std::sort(classes.begin(), classes.end());
    for (std::size_t c = 0; c < classes.size(); ++c) {
        ds.class_names.push_back(classes[c].filename().string());
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(classes[c])) {
            const auto ext = e.path().extension().string();
            if (e.is_regular_file() && (ext == ".pgm" || ext == ".ppm" || ext == ".pnm")) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) ds.items.push_back({read_pnm_file(f.string()), static_cast<int>(c)});
    }
    if (ds.items.empty()) throw Error("dataset directory " + dir + " holds no images");
    return ds;
}

// Training -------------------------------------------------------------------------------------

std::string metrics_csv(const Metrics& m) {
    std::ostringstream os;
    os.precision(10);
    os << "epoch,train_loss,train_accuracy,test_loss,test_accuracy\n";
    for (const auto& e : m.epochs) {
        os << e.epoch << ',' << e.train_loss << ',' << e.train_accuracy << ',' << e.test_loss << ','
           << e.test_accuracy << '\n';
    }
    return os.str();
}

namespace {

int argmax(const std::vector<double>& v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

Evaluation evaluate(const Network& net, std::span<const Sample> samples) {
    if (samples.empty()) return {0.0, 0.0};
    double loss = 0.0;
    std::size_t correct = 0;
    for (const auto& s : samples) {
        const ag::Tensor x = ag::Tensor::from(s.shape, s.values);
        loss += classification_loss(net, x, s.label).item();
        if (argmax(predict(net, x)) == s.label) ++correct;
    }
    const auto n = static_cast<double>(samples.size());
    return {loss / n, static_cast<double>(correct) / n};
}

Metrics train(Network& net, std::span<const Sample> train_set, std::span<const Sample> test_set,
              const TrainConfig& cfg) {
    if (!(cfg.lr >= 0.0) || !std::isfinite(cfg.lr)) throw ArgumentError("learning rate must be >= 0");
    if (cfg.epochs < 0) throw ArgumentError("epoch count must be >= 0");
    if (cfg.batch_size < 1) throw ArgumentError("batch size must be >= 1");
    if (train_set.empty()) throw ArgumentError("empty training set");

    auto params = net.parameters();
    Rng rng(cfg.seed);
    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    Metrics metrics;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const double weight = 1.0 / static_cast<double>(end - start);
            ag::zero_grad(params);
            for (std::size_t k = start; k < end; ++k) {
                const Sample& s = train_set[order[k]];
                const ag::Tensor loss = classification_loss(net, ag::Tensor::from(s.shape, s.values), s.label);
                if (!std::isfinite(loss.item())) {
                    throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                                       ": loss is " + std::to_string(loss.item()) + "; lower the learning rate");
                }
                ag::backward(ag::scale(loss, weight));
            }
            ag::sgd_step(params, cfg.lr);
        }
        const Evaluation tr = evaluate(net, train_set);
        const Evaluation te = evaluate(net, test_set);
        if (!std::isfinite(tr.loss)) {
            throw NumericError("training diverged at epoch " + std::to_string(epoch) + "; lower the learning rate");
        }
        metrics.epochs.push_back({epoch, tr.loss, tr.accuracy, te.loss, te.accuracy});
    }
    ag::zero_grad(params);
    return metrics;
}

Metrics train(Network& net, const Dataset& ds, const TrainConfig& cfg) {
    if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 0.5)) {
        throw ArgumentError("test fraction must lie in (0, 0.5)");
    }
    const Split parts = split(ds, cfg.test_fraction, cfg.seed);
    const auto tr = to_samples(parts.train);
    const auto te = to_samples(parts.test);
    return train(net, tr, te, cfg);
}

}  // namespace pixforge::nn
