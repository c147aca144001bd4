#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pixforge/error.hpp"
#include "pixforge/features.hpp"
#include "pixforge/filter.hpp"
#include "pixforge/geometry.hpp"
#include "pixforge/image.hpp"
#include "pixforge/image_opt.hpp"
#include "pixforge/nn.hpp"
#include "pixforge/spectral.hpp"

#include <complex>
#include <cstring>

namespace py = pybind11;
using namespace pixforge;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (H, W) or (H, W, 3) uint8 array <-> Image
Image to_image(const U8Array& a) {
    if (a.ndim() != 2 && a.ndim() != 3) throw ShapeError("image arrays are (H, W) or (H, W, C)");
    const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
    const int c = a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1;
    return Image(w, h, c, std::vector<std::uint8_t>(a.data(), a.data() + a.size()));
}

U8Array from_image(const Image& img) {
    std::vector<py::ssize_t> shape{img.height(), img.width()};
    if (img.channels() > 1) shape.push_back(img.channels());
    U8Array out(shape);
    std::memcpy(out.mutable_data(), img.data().data(), img.data().size());
    return out;
}

RealImage to_real(const F64Array& a) {
    if (a.ndim() != 2) throw ShapeError("real arrays are (H, W)");
    return RealImage(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)),
                     std::vector<double>(a.data(), a.data() + a.size()));
}

F64Array from_real(const RealImage& r) {
    F64Array out({r.height(), r.width()});
    std::copy(r.data().begin(), r.data().end(), out.mutable_data());
    return out;
}

py::array_t<std::complex<double>> from_spectrum(const SpectralPlane& sp) {
    py::array_t<std::complex<double>> out({sp.height(), sp.width()});
    std::copy(sp.coeffs().begin(), sp.coeffs().end(), out.mutable_data());
    return out;
}

SpectralPlane to_spectrum(const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw ShapeError("spectra are (H, W)");
    return SpectralPlane(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)),
                         std::vector<std::complex<double>>(a.data(), a.data() + a.size()));
}

py::list corner_list(const std::vector<Corner>& cs) {
    py::list out;
    for (const auto& c : cs) out.append(py::make_tuple(c.x, c.y, c.score));
    return out;
}

InterpMode interp_mode(const std::string& s) {
    if (s == "nearest") return InterpMode::Nearest;
    if (s == "bilinear") return InterpMode::Bilinear;
    throw ArgumentError("interp must be 'nearest' or 'bilinear'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Image processing primitives and a small CNN toolkit.";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    // images
    m.def("load_pnm", [](py::bytes b) {
        const std::string s = b;
        return from_image(load_pnm({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}));
    });
    m.def("save_pnm", [](const U8Array& a, bool ascii) {
        const auto bytes = save_pnm(to_image(a), ascii);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    }, py::arg("image"), py::arg("ascii") = false);
    m.def("histogram", [](const U8Array& a, int channel) {
        const Histogram h = histogram(to_image(a), channel);
        return std::vector<std::uint64_t>(h.bins.begin(), h.bins.end());
    }, py::arg("image"), py::arg("channel") = 0);
    m.def("equalize", [](const U8Array& a) { return from_image(equalize(to_image(a))); });
    m.def("point_op", [](const U8Array& a, double gain, double bias) {
        return from_image(point_op(to_image(a), gain, bias));
    }, py::arg("image"), py::arg("gain"), py::arg("bias"));

    // geometry
    m.def("rotate", [](const U8Array& a, double degrees, const std::string& interp) {
        const Image img = to_image(a);
        return from_image(warp(img, center_rotation(degrees, img.width(), img.height()), interp_mode(interp),
                               {img.width(), img.height()}));
    }, py::arg("image"), py::arg("degrees"), py::arg("interp") = "bilinear");
    m.def("interpolate", [](const F64Array& a, double x, double y, const std::string& interp) {
        return interpolate(to_real(a), x, y, interp_mode(interp));
    }, py::arg("plane"), py::arg("x"), py::arg("y"), py::arg("interp") = "bilinear");
    m.def("resize", [](const F64Array& a, int width, int height) {
        return from_real(resize(to_real(a), {width, height}));
    });

    // spatial filtering
    m.def("convolve", [](const F64Array& a, const F64Array& k, const std::string& border) {
        if (k.ndim() != 2) throw ShapeError("kernels are (H, W)");
        const Kernel kernel(static_cast<int>(k.shape(1)), static_cast<int>(k.shape(0)),
                            std::vector<double>(k.data(), k.data() + k.size()));
        if (border != "zero" && border != "clamp") throw ArgumentError("border must be 'zero' or 'clamp'");
        const BorderMode mode = border == "clamp" ? BorderMode::ClampToEdge : BorderMode::ZeroPad;
        return from_real(convolve(to_real(a), kernel, mode));
    }, py::arg("plane"), py::arg("kernel"), py::arg("border") = "zero");
    m.def("mean_kernel", [](int n) {
        const Kernel k = mean_kernel(n);
        return from_real(RealImage(k.width(), k.height(), k.coeffs()));
    });
    m.def("gaussian_kernel", [](double sigma) {
        const Kernel k = gaussian_kernel(sigma);
        return from_real(RealImage(k.width(), k.height(), k.coeffs()));
    });
    m.def("gradient", [](const F64Array& a) {
        const Gradient g = gradient(to_real(a));
        return py::make_tuple(from_real(g.gx), from_real(g.gy));
    });
    m.def("edges", [](const U8Array& a, double threshold) {
        return from_image(edge_magnitude(to_image(a), threshold));
    }, py::arg("image"), py::arg("threshold") = 0.2);

    // spectral
    m.def("dft2", [](const F64Array& a) { return from_spectrum(dft2(to_real(a))); });
    m.def("fft2", [](const F64Array& a) { return from_spectrum(fft2(to_real(a))); });
    m.def("idft2", [](const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& s) {
        return from_real(idft2(to_spectrum(s)));
    });
    m.def("ifft2", [](const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& s) {
        return from_real(ifft2(to_spectrum(s)));
    });
    m.def("lowpass_filter", [](const F64Array& a, double frac) {
        return from_real(lowpass_filter(to_real(a), frac));
    });

    // corners
    m.def("harris", [](const U8Array& a, double sigma, double k, double threshold, int radius) {
        return corner_list(harris(to_image(a), {sigma, k, threshold, radius}));
    }, py::arg("image"), py::arg("sigma") = 1.0, py::arg("k") = 0.05, py::arg("threshold") = 0.01,
       py::arg("radius") = 3);
    m.def("moravec", [](const U8Array& a, int window, double threshold, int radius, bool eight) {
        return corner_list(moravec(to_image(a), {window, threshold, radius, eight}));
    }, py::arg("image"), py::arg("window") = 3, py::arg("threshold") = 0.1, py::arg("radius") = 3,
       py::arg("eight_offsets") = false);

    // networks
    py::class_<nn::Network>(m, "Network")
        .def_static("small_cnn", &nn::small_cnn, py::arg("channels"), py::arg("height"), py::arg("width"),
                    py::arg("classes"), py::arg("seed") = 7)
        .def_static("from_bytes", [](py::bytes b) {
            const std::string s = b;
            return nn::read_network({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
        })
        .def("to_bytes", [](const nn::Network& net) {
            const auto bytes = nn::save_weights(net);
            return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        })
        .def("__len__", &nn::Network::size)
        .def("layer_names", [](const nn::Network& net) {
            std::vector<std::string> out;
            for (const auto& l : net.layers()) out.push_back(nn::layer_name(l));
            return out;
        })
        .def("predict", [](const nn::Network& net, const U8Array& a) { return nn::predict(net, to_image(a)); })
        .def("train", [](nn::Network& net, const std::vector<U8Array>& images, const std::vector<int>& labels,
                         double lr, int epochs, int batch, double test_fraction, std::uint64_t seed) {
            if (images.size() != labels.size()) throw ShapeError("images and labels differ in length");
            nn::Dataset ds;
            int classes = 0;
            for (std::size_t i = 0; i < images.size(); ++i) {
                ds.items.push_back({to_image(images[i]), labels[i]});
                classes = std::max(classes, labels[i] + 1);
            }
            for (int c = 0; c < classes; ++c) ds.class_names.push_back(std::to_string(c));
            const nn::Metrics metrics = nn::train(net, ds, {lr, epochs, batch, test_fraction, seed});
            py::list out;
            for (const auto& e : metrics.epochs) {
                py::dict d;
                d["epoch"] = e.epoch;
                d["train_loss"] = e.train_loss;
                d["train_accuracy"] = e.train_accuracy;
                d["test_loss"] = e.test_loss;
                d["test_accuracy"] = e.test_accuracy;
                out.append(d);
            }
            return out;
        }, py::arg("images"), py::arg("labels"), py::arg("lr") = 0.05, py::arg("epochs") = 20,
           py::arg("batch") = 16, py::arg("test_fraction") = 0.2, py::arg("seed") = 7);

    m.def("generate_shapes", [](int n, int size, std::uint64_t seed) {
        const nn::Dataset ds = nn::generate_shapes(n, size, seed);
        py::list images;
        std::vector<int> labels;
        for (const auto& item : ds.items) {
            images.append(from_image(item.image));
            labels.push_back(item.label);
        }
        return py::make_tuple(images, labels);
    }, py::arg("n"), py::arg("size") = 16, py::arg("seed") = 7);

    // pixel-space optimisation
    m.def("fgsm_attack", [](const nn::Network& net, const U8Array& a, int label, double eps) {
        return from_image(opt::fgsm_attack(net, to_image(a), label, eps));
    }, py::arg("net"), py::arg("image"), py::arg("label"), py::arg("eps") = 0.1);
    m.def("deep_dream", [](const nn::Network& net, const U8Array& a, std::vector<std::size_t> layers, int steps,
                           double lr, int octaves, double octave_scale) {
        const opt::DreamResult r =
            opt::deep_dream(net, to_image(a), {std::move(layers)}, {steps, lr, octaves, octave_scale});
        return py::make_tuple(from_image(r.image), r.initial_norm, r.final_norm);
    }, py::arg("net"), py::arg("image"), py::arg("layers"), py::arg("steps") = 20, py::arg("lr") = 0.05,
       py::arg("octaves") = 3, py::arg("octave_scale") = 1.4);
    m.def("style_transfer", [](const nn::Network& net, const U8Array& content, const U8Array& style,
                               double content_weight, double style_weight, int steps, double lr) {
        opt::StyleConfig cfg;
        cfg.content_weight = content_weight;
        cfg.style_weight = style_weight;
        cfg.steps = steps;
        cfg.lr = lr;
        const opt::StyleResult r = opt::style_transfer(net, to_image(content), to_image(style), cfg);
        return py::make_tuple(from_image(r.image), r.losses);
    }, py::arg("net"), py::arg("content"), py::arg("style"), py::arg("content_weight") = 1.0,
       py::arg("style_weight") = 1e3, py::arg("steps") = 200, py::arg("lr") = opt::StyleConfig{}.lr);
}
