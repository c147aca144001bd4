#include "pixforge/cli.hpp"

#include "pixforge/error.hpp"
#include "pixforge/features.hpp"
#include "pixforge/filter.hpp"
#include "pixforge/geometry.hpp"
#include "pixforge/image.hpp"
#include "pixforge/image_opt.hpp"
#include "pixforge/nn.hpp"
#include "pixforge/spectral.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace pixforge::cli {

namespace {

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f << text;
    if (!f) throw Error("short write to " + path);
}

// Apply a plane operation to every channel.
Image per_channel(const Image& img, const std::function<RealImage(const RealImage&)>& fn) {
    std::vector<RealImage> planes;
    for (int c = 0; c < img.channels(); ++c) planes.push_back(fn(channel_plane(img, c)));
    return from_planes(planes);
}

Image gray(const Image& img) { return img.channels() == 1 ? img : to_gray(img); }

std::string loss_csv(const std::vector<double>& v, const char* column) {
    std::ostringstream os;
    os << std::setprecision(17) << "step," << column << '\n';
    for (std::size_t i = 0; i < v.size(); ++i) os << i << ',' << v[i] << '\n';
    return os.str();
}

struct Options {
    // shared
    std::string input, output, csv;
    std::vector<std::string> inputs;
    std::string model;
    std::uint64_t seed = 7;

    int channel = 0;
    double gain = 1.0, bias = 0.0;

    double rotate = 0.0;
    std::vector<double> scale, shear, translate;
    std::string reflect;
    std::string interp = "bilinear";
    std::vector<int> size;

    std::string mask, border = "clamp";

    double threshold = 0.2;

    std::string spectrum;
    double lowpass = 0.0;
    bool use_dft = false;

    std::string method = "harris";
    double sigma = 1.0, k = 0.05, frac = -1.0;
    int window = 3, radius = 3;
    bool eight = false;

    std::string data, arch = "small_cnn", metrics;
    double lr = 0.05, test_frac = 0.2;
    int epochs = 20, batch = 16;

    std::string classes;
    double eps = 0.1;
    int label = -1;

    std::string layers;
    int steps = 20, octaves = 3;
    double octave_scale = 1.4;
    double dream_lr = 0.05;

    std::string content, style;
    double sw = 1e3, cw = 1.0, style_lr = opt::StyleConfig{}.lr;
    int style_steps = 200;

    int n = 500, image_size = 16;
};

struct Context {
    Options o;
    std::ostream& out;
    std::ostream& err;
};

int cmd_hist(Context& c) {
    const Image img = read_pnm_file(c.o.input);
    write_text(c.o.output, histogram_csv(histogram(img, c.o.channel)), c.out);
    return kOk;
}

int cmd_equalize(Context& c) {
    write_pnm_file(c.o.output, equalize(read_pnm_file(c.o.input)));
    return kOk;
}

int cmd_pointop(Context& c) {
    write_pnm_file(c.o.output, point_op(read_pnm_file(c.o.input), c.o.gain, c.o.bias));
    return kOk;
}

int cmd_warp(Context& c) {
    const Image img = read_pnm_file(c.o.input);
    const double cx = (img.width() - 1) / 2.0, cy = (img.height() - 1) / 2.0;
    AffineMap m = AffineMap::identity();
    if (c.o.scale.size() == 2) m = compose(about_point(AffineMap::scale(c.o.scale[0], c.o.scale[1]), cx, cy), m);
    if (c.o.shear.size() == 2) m = compose(about_point(AffineMap::shear(c.o.shear[0], c.o.shear[1]), cx, cy), m);
    if (!c.o.reflect.empty()) {
        const auto axis = c.o.reflect == "x" ? AffineMap::Axis::X : AffineMap::Axis::Y;
        m = compose(about_point(AffineMap::reflection(axis), cx, cy), m);
    }
    if (c.o.rotate != 0.0) m = compose(center_rotation(c.o.rotate, img.width(), img.height()), m);
    if (c.o.translate.size() == 2) m = compose(AffineMap::translation(c.o.translate[0], c.o.translate[1]), m);
    Size sz{img.width(), img.height()};
    if (c.o.size.size() == 2) sz = {c.o.size[0], c.o.size[1]};
    const InterpMode mode = c.o.interp == "nearest" ? InterpMode::Nearest : InterpMode::Bilinear;
    write_pnm_file(c.o.output, warp(img, m, mode, sz));
    return kOk;
}

// mean:N, gaussian:SIGMA or file:PATH
Kernel parse_mask(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw ArgumentError("mask must look like mean:N, gaussian:SIGMA or file:PATH");
    const std::string kind = spec.substr(0, colon), arg = spec.substr(colon + 1);
    if (kind == "file") return read_kernel_file(arg);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(arg, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != arg.size()) throw ArgumentError("bad mask parameter '" + arg + "'");
    if (kind == "mean") {
        if (v != std::floor(v)) throw ArgumentError("mean mask size must be an integer");
        return mean_kernel(static_cast<int>(v));
    }
    if (kind == "gaussian") return gaussian_kernel(v);
    throw ArgumentError("unknown mask kind '" + kind + "'");
}

int cmd_filter(Context& c) {
    const Kernel k = parse_mask(c.o.mask);
    const BorderMode border = c.o.border == "clamp" ? BorderMode::ClampToEdge : BorderMode::ZeroPad;
    write_pnm_file(c.o.output,
                   per_channel(read_pnm_file(c.o.input), [&](const RealImage& p) { return convolve(p, k, border); }));
    return kOk;
}

int cmd_edges(Context& c) {
    write_pnm_file(c.o.output, edge_magnitude(gray(read_pnm_file(c.o.input)), c.o.threshold));
    return kOk;
}

int cmd_fft(Context& c) {
    const RealImage plane = channel_plane(gray(read_pnm_file(c.o.input)), 0);
    const bool pow2 = is_power_of_two(plane.width()) && is_power_of_two(plane.height());
    if (!c.o.use_dft && !pow2) {
        c.err << "note: " << plane.width() << "x" << plane.height()
              << " is not a power of two; using the direct transform\n";
    }
    const SpectralPlane sp = (c.o.use_dft || !pow2) ? dft2(plane) : fft2(plane);
    if (!c.o.spectrum.empty()) write_pnm_file(c.o.spectrum, spectrum_image(sp));
    if (!c.o.csv.empty()) write_text(c.o.csv, spectrum_csv(sp), c.out);
    if (!c.o.output.empty()) {
        if (!(c.o.lowpass > 0.0)) throw ArgumentError("--out-filtered needs --lowpass FRAC");
        write_pnm_file(c.o.output, from_plane(lowpass_filter(plane, c.o.lowpass)));
    }
    if (c.o.spectrum.empty() && c.o.csv.empty() && c.o.output.empty()) c.out << spectrum_csv(sp);
    return kOk;
}

int cmd_corners(Context& c) {
    const Image img = gray(read_pnm_file(c.o.input));
    std::vector<Corner> corners;
    if (c.o.method == "moravec") {
        MoravecOptions mo;
        mo.window = c.o.window;
        mo.nms_radius = c.o.radius;
        mo.eight_offsets = c.o.eight;
        if (c.o.frac >= 0.0) mo.threshold_frac = c.o.frac;
        corners = moravec(img, mo);
    } else {
        HarrisOptions ho;
        ho.sigma = c.o.sigma;
        ho.k = c.o.k;
        ho.nms_radius = c.o.radius;
        if (c.o.frac >= 0.0) ho.threshold_frac = c.o.frac;
        corners = harris(img, ho);
    }
    std::ostringstream os;
    os << std::setprecision(17) << "x,y,score\n";
    for (const auto& k : corners) os << k.x << ',' << k.y << ',' << k.score << '\n';
    write_text(c.o.csv, os.str(), c.out);
    if (!c.o.output.empty()) write_pnm_file(c.o.output, annotate_corners(img, corners));
    return kOk;
}

int cmd_train(Context& c) {
    if (c.o.arch != "small_cnn") throw ArgumentError("unknown architecture '" + c.o.arch + "'");
    const nn::Dataset ds = nn::read_dataset(c.o.data);
    const Image& first = ds.items.front().image;
    for (const auto& item : ds.items) {
        if (item.image.width() != first.width() || item.image.height() != first.height() ||
            item.image.channels() != first.channels()) {
            throw ShapeError("dataset images differ in size");
        }
    }
    nn::Network net = nn::small_cnn(first.channels(), first.height(), first.width(),
                                    static_cast<int>(ds.class_names.size()), c.o.seed);
    nn::TrainConfig cfg;
    cfg.lr = c.o.lr;
    cfg.epochs = c.o.epochs;
    cfg.batch_size = c.o.batch;
    cfg.test_fraction = c.o.test_frac;
    cfg.seed = c.o.seed;
    const nn::Metrics m = nn::train(net, ds, cfg);
    nn::write_network_file(c.o.output, net);
    if (!c.o.metrics.empty()) write_text(c.o.metrics, nn::metrics_csv(m), c.out);
    for (std::size_t i = 0; i < ds.class_names.size(); ++i) {
        c.err << "class " << i << ": " << ds.class_names[i] << '\n';
    }
    if (!m.epochs.empty()) {
        const auto& e = m.epochs.back();
        c.err << "epoch " << e.epoch << ": train acc " << e.train_accuracy << ", test acc " << e.test_accuracy
              << '\n';
    }
    return kOk;
}

std::vector<std::string> class_labels(const std::string& names, std::size_t count) {
    std::vector<std::string> out;
    if (!names.empty()) {
        std::stringstream ss(names);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(item);
        if (out.size() != count) {
            throw ArgumentError("--classes lists " + std::to_string(out.size()) + " names, model has " +
                                std::to_string(count) + " classes");
        }
        return out;
    }
    for (std::size_t i = 0; i < count; ++i) out.push_back(std::to_string(i));
    return out;
}

int cmd_classify(Context& c) {
    const nn::Network net = nn::read_network_file(c.o.model);
    for (const auto& path : c.o.inputs) {
        const Image img = read_pnm_file(path);
        const auto probs = nn::predict(net, img);
        const auto names = class_labels(c.o.classes, probs.size());
        c.out << path;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            c.out << ' ' << names[i] << '=' << std::fixed << std::setprecision(2) << 100.0 * probs[i] << '%';
        }
        c.out << std::defaultfloat << '\n';
    }
    return kOk;
}

int predicted(const nn::Network& net, const Image& img) {
    const auto p = nn::predict(net, img);
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

int cmd_attack(Context& c) {
    const nn::Network net = nn::read_network_file(c.o.model);
    const Image img = read_pnm_file(c.o.input);
    const int label = c.o.label >= 0 ? c.o.label : predicted(net, img);
    const Image adv = opt::fgsm_attack(net, img, label, c.o.eps);
    write_pnm_file(c.o.output, adv);
    if (!c.o.csv.empty()) {
        const double before = nn::classification_loss(net, nn::image_tensor(img), label).item();
        const double after = nn::classification_loss(net, nn::image_tensor(adv), label).item();
        write_text(c.o.csv, loss_csv({before, after}, "loss"), c.out);
    }
    c.err << "class " << label << " -> predicted " << predicted(net, adv) << '\n';
    return kOk;
}

int cmd_dream(Context& c) {
    const nn::Network net = nn::read_network_file(c.o.model);
    const Image img = read_pnm_file(c.o.input);
    const opt::LayerSelection layers =
        c.o.layers.empty() ? opt::default_style_layers(net) : opt::parse_layers(c.o.layers);
    opt::DreamConfig cfg;
    cfg.steps = c.o.steps;
    cfg.octaves = c.o.octaves;
    cfg.octave_scale = c.o.octave_scale;
    cfg.lr = c.o.dream_lr;
    const opt::DreamResult r = opt::deep_dream(net, img, layers, cfg);
    write_pnm_file(c.o.output, r.image);
    if (!c.o.csv.empty()) write_text(c.o.csv, loss_csv(r.norms, "norm"), c.out);
    c.err << "activation norm " << r.initial_norm << " -> " << r.final_norm << '\n';
    return kOk;
}

int cmd_style(Context& c) {
    const nn::Network net = nn::read_network_file(c.o.model);
    opt::StyleConfig cfg;
    cfg.content_weight = c.o.cw;
    cfg.style_weight = c.o.sw;
    cfg.steps = c.o.style_steps;
    cfg.lr = c.o.style_lr;
    if (!c.o.layers.empty()) cfg.layers = opt::parse_layers(c.o.layers);
    const opt::StyleResult r =
        opt::style_transfer(net, read_pnm_file(c.o.content), read_pnm_file(c.o.style), cfg);
    write_pnm_file(c.o.output, r.image);
    if (!c.o.csv.empty()) write_text(c.o.csv, loss_csv(r.losses, "loss"), c.out);
    c.err << "style distance " << r.initial_style_distance << " -> " << r.final_style_distance << '\n';
    return kOk;
}

int cmd_gen_dataset(Context& c) {
    nn::write_dataset(c.o.output, nn::generate_shapes(c.o.n, c.o.image_size, c.o.seed));
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Context ctx{{}, out, err};
    Options& o = ctx.o;

    CLI::App app{"pixforge: image processing and small-network experiments"};
    app.name(args.empty() ? "pixforge" : args.front());
    app.require_subcommand(1);
    app.fallthrough(false);

    std::map<CLI::App*, std::function<int(Context&)>> handlers;
    const auto sub = [&](const char* name, const char* help, int (*fn)(Context&)) {
        CLI::App* s = app.add_subcommand(name, help);
        handlers[s] = fn;
        return s;
    };
    const auto image_in = [&](CLI::App* s) { s->add_option("image", o.input, "Input PGM/PPM")->required()->check(CLI::ExistingFile); };
    const auto image_out = [&](CLI::App* s) { s->add_option("-o,--out", o.output, "Output image")->required(); };
    const auto seed = [&](CLI::App* s) { s->add_option("--seed", o.seed, "Random seed")->capture_default_str(); };

    auto* hist = sub("hist", "Intensity histogram as CSV (value,count)", cmd_hist);
    image_in(hist);
    hist->add_option("-o,--out", o.output, "Output CSV (default: stdout)");
    hist->add_option("--channel", o.channel, "Channel index")->capture_default_str();

    auto* eq = sub("equalize", "Histogram equalization, per channel", cmd_equalize);
    image_in(eq);
    image_out(eq);

    auto* pop = sub("pointop", "Point operation v -> gain*v + bias", cmd_pointop);
    image_in(pop);
    image_out(pop);
    pop->add_option("--gain", o.gain)->capture_default_str();
    pop->add_option("--bias", o.bias)->capture_default_str();

    auto* wp = sub("warp", "Affine warp: scale, shear, reflect, rotate about the centre, then translate", cmd_warp);
    image_in(wp);
    image_out(wp);
    wp->add_option("--rotate", o.rotate, "Degrees, counterclockwise on screen");
    wp->add_option("--scale", o.scale, "SX,SY")->delimiter(',')->expected(2);
    wp->add_option("--shear", o.shear, "KX,KY")->delimiter(',')->expected(2);
    wp->add_option("--reflect", o.reflect, "Mirror across the horizontal (x) or vertical (y) centre line")
        ->check(CLI::IsMember({"x", "y"}));
    wp->add_option("--translate", o.translate, "DX,DY")->delimiter(',')->expected(2);
    wp->add_option("--size", o.size, "Output W,H")->delimiter(',')->expected(2);
    wp->add_option("--interp", o.interp)->check(CLI::IsMember({"nearest", "bilinear"}))->capture_default_str();

    auto* flt = sub("filter", "Linear convolution with a kernel", cmd_filter);
    image_in(flt);
    image_out(flt);
    flt->add_option("--mask", o.mask, "mean:N, gaussian:SIGMA or file:PATH (W H, then W*H reals)")->required();
    flt->add_option("--border", o.border)->check(CLI::IsMember({"zero", "clamp"}))->capture_default_str();

    auto* edg = sub("edges", "Thresholded gradient magnitude", cmd_edges);
    image_in(edg);
    image_out(edg);
    edg->add_option("--threshold", o.threshold, "Fraction of the peak magnitude")->capture_default_str();

    auto* fft = sub("fft", "2-D Fourier transform, spectrum and low-pass filtering", cmd_fft);
    image_in(fft);
    fft->add_option("--out-spectrum", o.spectrum, "Write the centred log-magnitude spectrum image");
    fft->add_option("--csv", o.csv, "Write coefficients as CSV (u,v,re,im)");
    fft->add_option("--lowpass", o.lowpass, "Keep frequencies within FRAC of the Nyquist radius");
    fft->add_option("--out-filtered", o.output, "Write the low-pass filtered image");
    fft->add_flag("--dft", o.use_dft, "Use the direct transform");

    auto* cor = sub("corners", "Moravec or Harris corner detection", cmd_corners);
    image_in(cor);
    cor->add_option("--detector", o.method)->check(CLI::IsMember({"harris", "moravec"}))->capture_default_str();
    cor->add_option("--csv", o.csv, "Corner list (default: stdout)");
    cor->add_option("-o,--out", o.output, "Annotated image");
    cor->add_option("--sigma", o.sigma, "Harris smoothing")->capture_default_str();
    cor->add_option("--k", o.k, "Harris trace weight")->capture_default_str();
    cor->add_option("--window", o.window, "Moravec window")->capture_default_str();
    cor->add_flag("--eight-offsets", o.eight, "Moravec: use eight shifts");
    cor->add_option("--threshold", o.frac, "Fraction of the peak response");
    cor->add_option("--radius", o.radius, "Non-maximum suppression radius")->capture_default_str();

    auto* trn = sub("train", "Train a classifier on a directory dataset", cmd_train);
    trn->add_option("--data", o.data, "One sub-directory per class")->required()->check(CLI::ExistingDirectory);
    trn->add_option("--arch", o.arch)->capture_default_str();
    trn->add_option("--lr", o.lr)->capture_default_str();
    trn->add_option("--epochs", o.epochs)->capture_default_str();
    trn->add_option("--batch", o.batch)->capture_default_str();
    trn->add_option("--test-frac", o.test_frac)->capture_default_str();
    seed(trn);
    trn->add_option("-o,--out", o.output, "Weights file")->required();
    trn->add_option("--metrics", o.metrics, "Per-epoch metrics CSV");

    auto* cls = sub("classify", "Per-class probabilities for each image", cmd_classify);
    cls->add_option("--model", o.model)->required()->check(CLI::ExistingFile);
    cls->add_option("--classes", o.classes, "Comma-separated class names");
    cls->add_option("images", o.inputs)->required()->check(CLI::ExistingFile);

    auto* atk = sub("attack", "Fast gradient sign attack", cmd_attack);
    atk->add_option("--model", o.model)->required()->check(CLI::ExistingFile);
    image_in(atk);
    image_out(atk);
    atk->add_option("--eps", o.eps, "Step on the [0,1] scale")->capture_default_str();
    atk->add_option("--label", o.label, "True class (default: the predicted one)");
    atk->add_option("--csv", o.csv, "Loss before and after");

    auto* drm = sub("dream", "Deep dream over an octave pyramid", cmd_dream);
    drm->add_option("--model", o.model)->required()->check(CLI::ExistingFile);
    image_in(drm);
    image_out(drm);
    drm->add_option("--layers", o.layers, "Comma-separated layer indices");
    drm->add_option("--steps", o.steps)->capture_default_str();
    drm->add_option("--octaves", o.octaves)->capture_default_str();
    drm->add_option("--octave-scale", o.octave_scale)->capture_default_str();
    drm->add_option("--lr", o.dream_lr)->capture_default_str();
    drm->add_option("--csv", o.csv, "Activation norm per step");

    auto* sty = sub("style", "Gram-matrix style transfer", cmd_style);
    sty->add_option("--model", o.model)->required()->check(CLI::ExistingFile);
    sty->add_option("--content", o.content)->required()->check(CLI::ExistingFile);
    sty->add_option("--style", o.style)->required()->check(CLI::ExistingFile);
    image_out(sty);
    sty->add_option("--sw", o.sw, "Style weight")->capture_default_str();
    sty->add_option("--cw", o.cw, "Content weight")->capture_default_str();
    sty->add_option("--steps", o.style_steps)->capture_default_str();
    sty->add_option("--lr", o.style_lr)->capture_default_str();
    sty->add_option("--layers", o.layers, "Tapped layers; the last is the content layer");
    sty->add_option("--csv", o.csv, "Total loss per step");

    auto* gen = sub("gen-dataset", "Synthesize the circles/squares dataset", cmd_gen_dataset);
    gen->add_option("-o,--out", o.output, "Output directory")->required();
    gen->add_option("--n", o.n, "Image count")->capture_default_str();
    gen->add_option("--size", o.image_size, "Side length")->capture_default_str();
    seed(gen);

    if (args.size() <= 1) {
        err << app.help();
        return kUsage;
    }
    try {
        std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
        app.parse(rest);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        return kUsage;
    }

    for (const auto& [s, fn] : handlers) {
        if (!s->parsed()) continue;
        try {
            return fn(ctx);
        } catch (const ArgumentError& e) {
            err << s->get_name() << ": " << e.what() << '\n';
            return kUsage;
        } catch (const std::exception& e) {
            err << s->get_name() << ": " << e.what() << '\n';
            return kData;
        }
    }
    err << app.help();
    return kUsage;
}

int run(int argc, const char* const* argv) {
    return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace pixforge::cli
