#pragma once

#include "pixforge/nn.hpp"

namespace fixture {

// Recipe for the reference shapes model: 500 images of 16×16, an 80/20 split.
inline constexpr int kShapes = 500;
inline constexpr int kSide = 16;
inline constexpr std::uint64_t kSeed = 7;

inline pixforge::nn::TrainConfig shapes_config() {
    pixforge::nn::TrainConfig cfg;
    cfg.lr = 0.1;
    cfg.epochs = 30;
    cfg.batch_size = 8;
    cfg.test_fraction = 0.2;
    cfg.seed = kSeed;
    return cfg;
}

struct ShapesModel {
    pixforge::nn::Network net;
    pixforge::nn::Split data;
    pixforge::nn::Metrics metrics;
};

inline ShapesModel train_shapes_model() {
    using namespace pixforge;
    const nn::TrainConfig cfg = shapes_config();
    ShapesModel m;
    m.data = nn::split(nn::generate_shapes(kShapes, kSide, kSeed), cfg.test_fraction, cfg.seed);
    m.net = nn::small_cnn(1, kSide, kSide, 2, kSeed);
    const auto train = nn::to_samples(m.data.train);
    const auto test = nn::to_samples(m.data.test);
    m.metrics = nn::train(m.net, train, test, cfg);
    return m;
}

// Trained once per test binary.
inline const ShapesModel& shapes_model() {
    static const ShapesModel m = train_shapes_model();
    return m;
}

inline double accuracy(const pixforge::nn::Network& net, const std::vector<pixforge::nn::LabeledImage>& items) {
    int ok = 0;
    for (const auto& it : items) {
        const auto p = pixforge::nn::predict(net, it.image);
        int best = 0;
        for (int k = 1; k < static_cast<int>(p.size()); ++k) {
            if (p[k] > p[best]) best = k;
        }
        ok += best == it.label;
    }
    return static_cast<double>(ok) / static_cast<double>(items.size());
}

}  // namespace fixture
