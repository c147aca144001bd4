#include "pixforge/image_opt.hpp"

#include "pixforge/error.hpp"
#include "pixforge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pixforge::opt {

FreezeGuard::FreezeGuard(const nn::Network& net) : params_(net.parameters()) {
    for (auto& p : params_) {
        was_frozen_.push_back(p.frozen());
        p.set_frozen(true);
    }
}

FreezeGuard::~FreezeGuard() {
    for (std::size_t i = 0; i < params_.size(); ++i) {
        params_[i].set_frozen(was_frozen_[i]);
        params_[i].zero_grad();
    }
}

void LayerSelection::validate(const nn::Network& net) const {
    if (indices.empty()) throw ArgumentError("layer selection is empty");
    for (std::size_t i : indices) {
        if (i >= net.size()) {
            throw ArgumentError("layer index " + std::to_string(i) + " out of range for a " +
                                std::to_string(net.size()) + "-layer network");
        }
    }
}

LayerSelection parse_layers(const std::string& text) {
    LayerSelection sel;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        long v = -1;
        try {
            v = std::stol(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || v < 0) throw ArgumentError("bad layer index '" + item + "'");
        sel.indices.push_back(static_cast<std::size_t>(v));
    }
    std::sort(sel.indices.begin(), sel.indices.end());
    sel.indices.erase(std::unique(sel.indices.begin(), sel.indices.end()), sel.indices.end());
    if (sel.indices.empty()) throw ArgumentError("layer selection is empty");
    return sel;
}

namespace {

ag::Shape image_shape(const Image& img) { return {img.channels(), img.height(), img.width()}; }

void require_input(const nn::Network& net, const Image& img) {
    if (img.empty()) throw ShapeError("empty image");
    net.output_shape(image_shape(img));
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Network holding only the layers needed to reach the last tapped one.
nn::Network prefix(const nn::Network& net, std::size_t last) {
    return nn::Network({net.layers().begin(), net.layers().begin() + static_cast<std::ptrdiff_t>(last) + 1});
}

ag::Tensor dream_loss(const nn::Network& net, const ag::Tensor& x, const LayerSelection& layers) {
    const auto acts = net.forward_until(x, layers.last());
    ag::Tensor loss;
    for (std::size_t i : layers.indices) {
        const ag::Tensor term = ag::sqnorm(acts[i]);
        loss = loss.defined() ? ag::add(loss, term) : term;
    }
    return loss;
}

}  // namespace

Image fgsm_attack(const nn::Network& net, const Image& img, int label, double eps) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw ArgumentError("epsilon must be >= 0");
    require_input(net, img);
    FreezeGuard freeze(net);
    const ag::Tensor x = nn::image_tensor(img);
    ag::backward(nn::classification_loss(net, x, label));
    std::vector<double> adv(x.values().begin(), x.values().end());
    const auto g = x.grad();
    for (std::size_t i = 0; i < adv.size(); ++i) {
        const double s = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
        adv[i] = clamp01(adv[i] + eps * s);
    }
    return nn::tensor_image(adv, x.shape());
}

double activation_norm(const nn::Network& net, std::span<const double> pixels, const ag::Shape& shape,
                       const LayerSelection& layers) {
    layers.validate(net);
    return dream_loss(net, ag::Tensor::from(shape, {pixels.begin(), pixels.end()}), layers).item();
}

DreamStep dream_step(const nn::Network& net, std::span<const double> pixels, const ag::Shape& shape,
                     const LayerSelection& layers, double lr) {
    layers.validate(net);
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ArgumentError("dream learning rate must be >= 0");
    FreezeGuard freeze(net);
    const ag::Tensor x = ag::Tensor::from(shape, {pixels.begin(), pixels.end()});
    const ag::Tensor loss = dream_loss(net, x, layers);
    ag::backward(loss);
    const auto g = x.grad();
    double mean_abs = 0.0;
    for (double v : g) mean_abs += std::abs(v);
    mean_abs /= static_cast<double>(g.size());
    const double norm = 1.0 / (mean_abs + 1e-8);

    DreamStep out{{pixels.begin(), pixels.end()}, loss.item(), loss.item(), 0, false};
    if (lr == 0.0 || mean_abs == 0.0) return out;
    std::vector<double> trial(pixels.size());
    double step = lr;
    for (int halvings = 0; halvings <= 5; ++halvings, step /= 2.0) {
        for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = clamp01(pixels[i] + step * g[i] * norm);
        const double after = activation_norm(net, trial, shape, layers);
        if (after > out.norm_before) {
            out.pixels = std::move(trial);
            out.norm_after = after;
            out.halvings = halvings;
            out.accepted = true;
            return out;
        }
    }
    return out;
}

DreamResult deep_dream(const nn::Network& net, const Image& img, const LayerSelection& layers,
                       const DreamConfig& cfg) {
    layers.validate(net);
    require_input(net, img);
    if (cfg.octaves < 1) throw ArgumentError("octave count must be >= 1");
    if (!(cfg.octave_scale > 1.0)) throw ArgumentError("octave scale must be > 1");
    if (cfg.steps < 0) throw ArgumentError("step count must be >= 0");

    const int channels = img.channels();
    std::vector<Size> sizes;
    for (int o = cfg.octaves - 1; o >= 0; --o) {
        const double f = std::pow(cfg.octave_scale, o);
        sizes.push_back({static_cast<int>(std::lround(img.width() / f)),
                         static_cast<int>(std::lround(img.height() / f))});
    }
    const nn::Network head = prefix(net, layers.last());
    try {
        head.output_shape({channels, sizes.front().height, sizes.front().width});
    } catch (const ShapeError& e) {
        throw ArgumentError("image too small for " + std::to_string(cfg.octaves) + " octaves at scale " +
                            std::to_string(cfg.octave_scale) + ": " + e.what());
    }

    std::vector<RealImage> base;
    for (int c = 0; c < channels; ++c) {
        RealImage p = channel_plane(img, c);
        for (double& v : p.data()) v /= 255.0;
        base.push_back(std::move(p));
    }

    const auto pack = [&](const std::vector<RealImage>& planes) {
        std::vector<double> v;
        for (const auto& p : planes) v.insert(v.end(), p.data().begin(), p.data().end());
        return v;
    };
    const ag::Shape full_shape{channels, img.height(), img.width()};

    DreamResult result;
    result.initial_norm = activation_norm(net, pack(base), full_shape, layers);

    std::vector<RealImage> detail;
    std::vector<double> pixels;
    for (std::size_t o = 0; o < sizes.size(); ++o) {
        const Size sz = sizes[o];
        const ag::Shape shape{channels, sz.height, sz.width};
        std::vector<RealImage> octave_base, current;
        for (int c = 0; c < channels; ++c) {
            RealImage b = (sz.width == img.width() && sz.height == img.height()) ? base[c] : resize(base[c], sz);
            RealImage cur = b;
            if (!detail.empty()) {
                const RealImage d = resize(detail[c], sz);
                for (std::size_t i = 0; i < cur.size(); ++i) cur.data()[i] = clamp01(cur.data()[i] + d.data()[i]);
            }
            octave_base.push_back(std::move(b));
            current.push_back(std::move(cur));
        }
        pixels = pack(current);
        for (int s = 0; s < cfg.steps; ++s) {
            DreamStep st = dream_step(head, pixels, shape, layers, cfg.lr);
            pixels = std::move(st.pixels);
            result.norms.push_back(st.norm_after);
        }
        detail.clear();
        const std::size_t plane = static_cast<std::size_t>(sz.width) * sz.height;
        for (int c = 0; c < channels; ++c) {
            RealImage d(sz.width, sz.height);
            for (std::size_t i = 0; i < plane; ++i) {
                d.data()[i] = pixels[c * plane + i] - octave_base[c].data()[i];
            }
            detail.push_back(std::move(d));
        }
    }
    result.final_norm = activation_norm(net, pixels, full_shape, layers);
    result.image = nn::tensor_image(pixels, full_shape);
    return result;
}

double content_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ShapeError("content activations differ in size: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
    }
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
    return d;
}

ag::Tensor gram_tensor(const ag::Tensor& acts) {
    if (acts.rank() != 3) throw ShapeError("gram expects (C, H, W) activations, got " + ag::shape_str(acts.shape()));
    const int c = acts.dim(0);
    const int hw = acts.dim(1) * acts.dim(2);
    const ag::Tensor f = ag::reshape(acts, {c, hw});
    return ag::scale(ag::matmul(f, ag::transpose(f)), 1.0 / (static_cast<double>(c) * hw));
}

RealImage gram(const ag::Tensor& acts) {
    const ag::Tensor g = gram_tensor(acts.detach());
    return RealImage(g.dim(1), g.dim(0), {g.values().begin(), g.values().end()});
}

LayerSelection default_style_layers(const nn::Network& net) {
    LayerSelection sel;
    const auto& ls = net.layers();
    for (std::size_t i = 1; i < ls.size(); ++i) {
        if (std::holds_alternative<nn::Relu>(ls[i]) && std::holds_alternative<nn::Conv>(ls[i - 1])) {
            sel.indices.push_back(i);
        }
    }
    if (sel.indices.empty()) throw ArgumentError("network has no conv+relu block to take style from");
    return sel;
}

namespace {

struct StyleTargets {
    std::vector<double> content;
    std::vector<ag::Tensor> grams;
};

struct StyleLoss {
    ag::Tensor total;
    double style_distance;
};

StyleLoss style_loss(const nn::Network& net, const ag::Tensor& x, const LayerSelection& layers,
                     const StyleTargets& targets, const StyleConfig& cfg) {
    const auto acts = net.forward_until(x, layers.last());
    const ag::Tensor& cact = acts[layers.last()];
    const ag::Tensor content =
        ag::sqnorm(ag::sub(cact, ag::Tensor::from(cact.shape(), targets.content)));
    ag::Tensor style;
    for (std::size_t k = 0; k < layers.indices.size(); ++k) {
        const ag::Tensor d = ag::sqnorm(ag::sub(gram_tensor(acts[layers.indices[k]]), targets.grams[k]));
        style = style.defined() ? ag::add(style, d) : d;
    }
    return {ag::add(ag::scale(content, cfg.content_weight), ag::scale(style, cfg.style_weight)), style.item()};
}

}  // namespace

StyleResult style_transfer(const nn::Network& net, const Image& content, const Image& style,
                           const StyleConfig& cfg) {
    require_input(net, content);
    require_input(net, style);
    if (image_shape(content) != image_shape(style)) {
        throw ShapeError("content and style images differ in size");
    }
    if (cfg.steps < 0) throw ArgumentError("step count must be >= 0");
    if (!(cfg.lr >= 0.0) || !(cfg.content_weight >= 0.0) || !(cfg.style_weight >= 0.0)) {
        throw ArgumentError("learning rate and loss weights must be >= 0");
    }
    const LayerSelection layers = cfg.layers.indices.empty() ? default_style_layers(net) : cfg.layers;
    layers.validate(net);
    FreezeGuard freeze(net);

    StyleTargets targets;
    {
        const auto cacts = net.forward_until(nn::image_tensor(content), layers.last());
        const auto v = cacts[layers.last()].values();
        targets.content.assign(v.begin(), v.end());
        const auto sacts = net.forward_until(nn::image_tensor(style), layers.last());
        for (std::size_t i : layers.indices) targets.grams.push_back(gram_tensor(sacts[i].detach()).detach());
    }

    const ag::Tensor start = nn::image_tensor(content);
    const ag::Shape shape = start.shape();
    std::vector<double> pixels(start.values().begin(), start.values().end());

    StyleResult result{content, {}, 0.0, 0.0};
    bool changed = false;
    for (int s = 0; s <= cfg.steps; ++s) {
        const ag::Tensor x = ag::Tensor::from(shape, pixels);
        const StyleLoss l = style_loss(net, x, layers, targets, cfg);
        const double loss = l.total.item();
        if (!std::isfinite(loss)) throw NumericError("style loss became non-finite at step " + std::to_string(s));
        if (s == 0) result.initial_style_distance = l.style_distance;
        result.final_style_distance = l.style_distance;
        result.losses.push_back(loss);
        if (s == cfg.steps || loss == 0.0 || cfg.lr == 0.0) break;
        ag::backward(l.total);
        const auto g = x.grad();
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            const double next = clamp01(pixels[i] - cfg.lr * g[i]);
            changed = changed || next != pixels[i];
            pixels[i] = next;
        }
    }
    if (changed) result.image = nn::tensor_image(pixels, shape);
    return result;
}

}  // namespace pixforge::opt
