#pragma once

#include "pixforge/autograd.hpp"
#include "pixforge/image.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace pixforge::nn {

// Layers -----------------------------------------------------------------------

/// Fully connected: y = A x + B, A is (out, in).
struct Dense {
    ag::Tensor A;
    ag::Tensor B;
};

/// Valid convolution, filters (out_ch, in_ch, kh, kw).
struct Conv {
    ag::Tensor filters;
    ag::Tensor bias;
    int stride = 1;
};

struct MaxPool {
    int window = 2;
    int stride = 2;
};

struct Relu {};
struct Flatten {};
struct Sigmoid {};

using Layer = std::variant<Dense, Conv, MaxPool, Relu, Flatten, Sigmoid>;

std::string layer_name(const Layer& layer);

/// Seeded generator used for initialisation, shuffling and dataset synthesis.
/// Built on mt19937_64 with explicit conversions so runs are bit-reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::size_t below(std::size_t n);
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

/// Weights uniform in ±√(6 / (fan_in + fan_out)), zero bias.
Dense make_dense(int out, int in, Rng& rng);
Conv make_conv(int out_ch, int in_ch, int kh, int kw, int stride, Rng& rng);

// Network ----------------------------------------------------------------------

class Network {
public:
    Network() = default;
    explicit Network(std::vector<Layer> layers) : layers_(std::move(layers)) {}

    const std::vector<Layer>& layers() const noexcept { return layers_; }
    std::size_t size() const noexcept { return layers_.size(); }

    /// Trainable tensors in layer order. Handles alias the network's storage.
    std::vector<ag::Tensor> parameters() const;

    ag::Tensor forward(const ag::Tensor& x) const;
    /// Output of every layer up to and including `last`.
    std::vector<ag::Tensor> forward_until(const ag::Tensor& x, std::size_t last) const;

    /// Output shape for a given input shape; throws ShapeError if layers do not compose.
    ag::Shape output_shape(const ag::Shape& input) const;

private:
    std::vector<Layer> layers_;
};

/// Conv 8×3×3 → Relu → MaxPool 2 → Flatten → Dense(classes).
Network small_cnn(int channels, int height, int width, int classes, std::uint64_t seed);

ag::Tensor apply_layer(const Layer& layer, const ag::Tensor& x);

/// True when the network ends in a single unit.
bool is_binary(const Network& net, const ag::Shape& input);

/// Pre-activation scores: the network output with a trailing Sigmoid removed.
ag::Tensor logits(const Network& net, const ag::Tensor& x);

/// Sigmoid + binary cross-entropy for single-output nets, softmax
/// cross-entropy otherwise.
ag::Tensor classification_loss(const Network& net, const ag::Tensor& x, int label);

/// Per-class probabilities. Single-output nets return {1 − p, p} where p is
/// the sigmoid output, so class 1 wins iff p > 0.5.
std::vector<double> predict(const Network& net, const ag::Tensor& x);
std::vector<double> predict(const Network& net, const Image& img);

/// (C, H, W) tensor with intensities scaled to [0, 1].
ag::Tensor image_tensor(const Image& img);
/// Inverse of image_tensor with the shared quantization rule.
Image tensor_image(std::span<const double> values, const ag::Shape& shape);

void set_frozen(const Network& net, bool frozen);

// Weights file -----------------------------------------------------------------

/// "PXFG1", u32 layer count, then per layer: u8 kind, u32 dim count,
/// u32 dims, parameters as little-endian IEEE-754 doubles.
std::vector<std::uint8_t> save_weights(const Network& net);
/// Overwrite parameters in place; the stored layout must match `net`.
void load_weights(Network& net, std::span<const std::uint8_t> bytes);
/// Rebuild the whole network from a weights file.
Network read_network(std::span<const std::uint8_t> bytes);

void write_network_file(const std::string& path, const Network& net);
Network read_network_file(const std::string& path);

// Data ---------------------------------------------------------------------------

struct LabeledImage {
    Image image;
    int label;
};

struct Dataset {
    std::vector<LabeledImage> items;
    std::vector<std::string> class_names;
};

/// Network-ready example: values already scaled.
struct Sample {
    ag::Shape shape;
    std::vector<double> values;
    int label;
};

std::vector<Sample> to_samples(const Dataset& ds);

struct Split {
    Dataset train;
    Dataset test;
};

/// Seeded shuffle then partition into round(fraction · n) test items. Every
/// class with at least two items appears on both sides, even if that needs a
/// few extra test items.
Split split(const Dataset& ds, double test_fraction, std::uint64_t seed);

/// Circles (label 0) and squares (label 1) with jittered size, position,
/// contrast and noise. Labels alternate, so n/2 of each.
Dataset generate_shapes(int n, int size, std::uint64_t seed);

/// One sub-directory per class holding P5 images.
void write_dataset(const std::string& dir, const Dataset& ds);
/// Class names are the sorted sub-directory names.
Dataset read_dataset(const std::string& dir);

// Training -----------------------------------------------------------------------

struct TrainConfig {
    double lr = 0.05;
    int epochs = 20;
    int batch_size = 16;
    double test_fraction = 0.2;
    std::uint64_t seed = 7;
};

struct EpochMetrics {
    int epoch;
    double train_loss;
    double train_accuracy;
    double test_loss;
    double test_accuracy;
    friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct Metrics {
    std::vector<EpochMetrics> epochs;
    friend bool operator==(const Metrics&, const Metrics&) = default;
};

std::string metrics_csv(const Metrics& m);

struct Evaluation {
    double loss;
    double accuracy;
};
Evaluation evaluate(const Network& net, std::span<const Sample> samples);

/// Mini-batch gradient descent. Each epoch shuffles the training samples,
/// averages the loss over every batch, takes one sgd step per batch, and then
/// scores both sets. Throws NumericError if the loss stops being finite.
Metrics train(Network& net, std::span<const Sample> train_set, std::span<const Sample> test_set,
              const TrainConfig& cfg);
/// Split with cfg.test_fraction and cfg.seed, then train.
Metrics train(Network& net, const Dataset& ds, const TrainConfig& cfg);

}  // namespace pixforge::nn
