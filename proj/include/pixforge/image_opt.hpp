#pragma once

#include "pixforge/image.hpp"
#include "pixforge/nn.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace pixforge::opt {

/// Freezes every parameter of a network for the guard's lifetime. On exit the
/// previous flags come back and the gradients picked up meanwhile are cleared.
class FreezeGuard {
public:
    explicit FreezeGuard(const nn::Network& net);
    ~FreezeGuard();
    FreezeGuard(const FreezeGuard&) = delete;
    FreezeGuard& operator=(const FreezeGuard&) = delete;

private:
    std::vector<ag::Tensor> params_;
    std::vector<bool> was_frozen_;
};

/// Indices of the layers whose outputs are tapped. Sorted and unique.
struct LayerSelection {
    std::vector<std::size_t> indices;

    /// Throws ArgumentError if empty or out of range for `net`.
    void validate(const nn::Network& net) const;
    std::size_t last() const { return indices.back(); }
};

/// Parse "0,2,3" into a selection.
LayerSelection parse_layers(const std::string& text);

// Adversarial attack --------------------------------------------------------------

/// One signed-gradient step of size eps (on the [0, 1] scale) that increases
/// the loss for `label`.
Image fgsm_attack(const nn::Network& net, const Image& img, int label, double eps);

// Deep dream -----------------------------------------------------------------------

/// Σ‖activation‖² over the selected layers for a (C, H, W) pixel tensor.
double activation_norm(const nn::Network& net, std::span<const double> pixels, const ag::Shape& shape,
                       const LayerSelection& layers);

struct DreamStep {
    std::vector<double> pixels;
    double norm_before;
    double norm_after;
    /// How many times the step was halved before it was accepted.
    int halvings;
    bool accepted;
};

/// Normalized gradient ascent on the activation norm, clamped to [0, 1]. A
/// step that fails to raise the norm is halved up to 5 times; if none
/// succeeds the pixels are returned unchanged.
DreamStep dream_step(const nn::Network& net, std::span<const double> pixels, const ag::Shape& shape,
                     const LayerSelection& layers, double lr);

struct DreamConfig {
    int steps = 20;
    double lr = 0.05;
    int octaves = 3;
    double octave_scale = 1.4;
};

struct DreamResult {
    Image image;
    /// Activation norm after every step, octave by octave.
    std::vector<double> norms;
    double initial_norm;
    double final_norm;
};

/// Runs dream steps over an image pyramid from the smallest octave up,
/// carrying the added detail to each larger scale.
DreamResult deep_dream(const nn::Network& net, const Image& img, const LayerSelection& layers,
                       const DreamConfig& cfg = {});

// Style transfer ---------------------------------------------------------------------

/// Squared L2 distance.
double content_distance(std::span<const double> a, std::span<const double> b);

/// Inner products of the flattened channels of acts (C, H, W), divided by
/// C·H·W. Returned as a C×C matrix.
RealImage gram(const ag::Tensor& acts);
/// Differentiable form of gram, shape (C, C).
ag::Tensor gram_tensor(const ag::Tensor& acts);

/// Every Relu that directly follows a Conv.
LayerSelection default_style_layers(const nn::Network& net);

struct StyleConfig {
    double content_weight = 1.0;
    double style_weight = 1e3;
    int steps = 200;
    double lr = 0.005;
    /// Empty means default_style_layers; the content layer is the last entry.
    LayerSelection layers;
};

struct StyleResult {
    Image image;
    /// Total loss before every step plus the final value.
    std::vector<double> losses;
    double initial_style_distance;
    double final_style_distance;
};

StyleResult style_transfer(const nn::Network& net, const Image& content, const Image& style,
                           const StyleConfig& cfg = {});

}  // namespace pixforge::opt
