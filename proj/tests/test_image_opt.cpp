#include <doctest.h>

#include "fixtures.hpp"
#include "pixforge/error.hpp"
#include "pixforge/image_opt.hpp"

#include <random>

using namespace pixforge;
using ag::Tensor;

namespace {

const fixture::ShapesModel& model() { return fixture::shapes_model(); }

const Image& test_image(std::size_t i) { return model().data.test.items.at(i).image; }

std::vector<double> pixels_of(const Image& img) {
    const Tensor t = nn::image_tensor(img);
    return {t.values().begin(), t.values().end()};
}

int max_abs_step(const Image& a, const Image& b) {
    int m = 0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

// Stripe pattern unlike anything in the training set.
Image stripes(int side) {
    Image img(side, side, 1);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) img.at(x, y) = (x / 2) % 2 ? 230 : 20;
    }
    return img;
}

}  // namespace

TEST_CASE("layer selections") {
    const nn::Network& net = model().net;
    CHECK(opt::parse_layers("2,0,2").indices == std::vector<std::size_t>{0, 2});
    CHECK_THROWS_AS(opt::parse_layers(""), ArgumentError);
    CHECK_THROWS_AS(opt::parse_layers("1,x"), ArgumentError);
    CHECK_THROWS_AS(opt::parse_layers("-1"), ArgumentError);
    CHECK_THROWS_AS(opt::LayerSelection{}.validate(net), ArgumentError);
    CHECK_THROWS_AS(opt::LayerSelection{{9}}.validate(net), ArgumentError);
    CHECK(opt::default_style_layers(net).indices == std::vector<std::size_t>{1});
    CHECK_THROWS_AS(opt::default_style_layers(nn::Network({nn::Flatten{}})), ArgumentError);
}

TEST_CASE("freeze guard restores flags and clears gradients") {
    nn::Network net = nn::small_cnn(1, 8, 8, 2, 1);
    auto params = net.parameters();
    params[1].set_frozen(true);
    {
        const opt::FreezeGuard guard(net);
        for (const auto& p : net.parameters()) CHECK(p.frozen());
        ag::backward(nn::classification_loss(net, Tensor::full({1, 8, 8}, 0.5), 1));
    }
    CHECK_FALSE(params[0].frozen());
    CHECK(params[1].frozen());
    for (const auto& p : params) {
        for (double g : p.grad()) CHECK(g == 0.0);
    }
}

TEST_CASE("fgsm") {
    const nn::Network& net = model().net;
    const auto weights = nn::save_weights(net);
    const Image& img = test_image(0);
    const int label = model().data.test.items[0].label;

    CHECK(opt::fgsm_attack(net, img, label, 0.0) == img);
    for (double eps : {0.01, 0.05, 0.1, 0.3}) {
        const Image adv = opt::fgsm_attack(net, img, label, eps);
        CHECK(max_abs_step(adv, img) <= static_cast<int>(std::ceil(eps * 255.0)) + 1);
    }
    const Image adv = opt::fgsm_attack(net, img, label, 0.1);
    CHECK(adv != img);
    // The attack pushes the true class down.
    CHECK(nn::predict(net, adv)[label] < nn::predict(net, img)[label]);
    CHECK(nn::save_weights(net) == weights);
    for (const auto& p : net.parameters()) {
        CHECK_FALSE(p.frozen());
        for (double g : p.grad()) CHECK(g == 0.0);
    }
    CHECK_THROWS_AS(opt::fgsm_attack(net, img, label, -0.1), ArgumentError);
    CHECK_THROWS_AS(opt::fgsm_attack(net, Image(12, 12, 1), label, 0.1), ShapeError);
}

TEST_CASE("fgsm lowers accuracy on the held-out set") {
    const auto& m = model();
    std::vector<nn::LabeledImage> attacked;
    for (const auto& it : m.data.test.items) attacked.push_back({opt::fgsm_attack(m.net, it.image, it.label, 0.1), it.label});
    const double clean = fixture::accuracy(m.net, m.data.test.items);
    CHECK(clean - fixture::accuracy(m.net, attacked) >= 0.3);
}

TEST_CASE("dream steps never lower the norm") {
    const nn::Network& net = model().net;
    const auto weights = nn::save_weights(net);
    const ag::Shape shape{1, 16, 16};
    for (const auto& sel : {opt::LayerSelection{{0}}, opt::LayerSelection{{1, 2}}, opt::LayerSelection{{4}}}) {
        std::vector<double> px = pixels_of(test_image(1));
        double norm = opt::activation_norm(net, px, shape, sel);
        for (int s = 0; s < 10; ++s) {
            const opt::DreamStep st = opt::dream_step(net, px, shape, sel, 0.05);
            CHECK(st.norm_before == norm);
            CHECK(st.norm_after >= st.norm_before);
            if (!st.accepted) CHECK(st.pixels == px);
            for (double v : st.pixels) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
            px = st.pixels;
            norm = st.norm_after;
        }
    }
    const std::vector<double> px = pixels_of(test_image(1));
    const opt::DreamStep still = opt::dream_step(net, px, shape, {{0}}, 0.0);
    CHECK(still.pixels == px);
    CHECK_THROWS_AS(opt::dream_step(net, px, shape, {}, 0.1), ArgumentError);
    CHECK(nn::save_weights(net) == weights);
}

TEST_CASE("deep dream") {
    const nn::Network& net = model().net;
    const auto weights = nn::save_weights(net);
    const Image& img = test_image(2);

    CHECK(opt::deep_dream(net, img, {{0}}, {0, 0.05, 1, 1.4}).image == img);

    const opt::DreamResult r = opt::deep_dream(net, img, {{0, 1}});
    CHECK(r.final_norm > r.initial_norm);
    CHECK(r.norms.size() == 60);
    CHECK(r.image.width() == 16);
    CHECK(r.image != img);

    const opt::DreamResult early = opt::deep_dream(net, img, {{0}});
    const opt::DreamResult late = opt::deep_dream(net, img, {{2}});
    CHECK(early.image != late.image);
    CHECK(nn::save_weights(net) == weights);

    // The dense head only accepts the full input size.
    CHECK_THROWS_AS(opt::deep_dream(net, img, {{4}}), ArgumentError);
    const opt::DreamResult head = opt::deep_dream(net, img, {{4}}, {5, 0.05, 1, 1.4});
    CHECK(head.final_norm >= head.initial_norm);
    CHECK_THROWS_AS(opt::deep_dream(net, img, {{0}}, {5, 0.05, 0, 1.4}), ArgumentError);
    CHECK_THROWS_AS(opt::deep_dream(net, img, {{0}}, {5, 0.05, 2, 1.0}), ArgumentError);
    CHECK_THROWS_AS(opt::deep_dream(net, Image(16, 16, 1), {{0}}, {5, 0.05, 8, 1.4}), ArgumentError);
}

TEST_CASE("content distance and gram matrices") {
    const std::vector<double> a{1, 2}, b{3, 2};
    CHECK(opt::content_distance(a, b) == 4.0);
    CHECK(opt::content_distance(b, a) == 4.0);
    CHECK(opt::content_distance(a, a) == 0.0);
    CHECK_THROWS_AS(opt::content_distance(a, std::vector<double>{1}), ShapeError);

    const RealImage ortho = opt::gram(Tensor::from({2, 1, 2}, {1, 0, 0, 1}));
    CHECK(ortho.at(1, 0) == 0.0);
    CHECK(ortho.at(0, 1) == 0.0);
    CHECK(opt::gram(Tensor::from({2, 1, 2}, {2, 0, 0, 2})) == RealImage::from_rows({{1, 0}, {0, 1}}));
    CHECK_THROWS_AS(opt::gram(Tensor::zeros({4})), ShapeError);

    std::mt19937_64 rng(61);
    std::normal_distribution<double> d;
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> v(5 * 3 * 4);
        for (double& x : v) x = d(rng);
        const RealImage g = opt::gram(Tensor::from({5, 3, 4}, v));
        for (int j = 0; j < 5; ++j) {
            CHECK(g.at(j, j) >= 0.0);
            for (int k = 0; k < 5; ++k) CHECK(g.at(j, k) == g.at(k, j));
        }
        for (int q = 0; q < 20; ++q) {
            std::vector<double> z(5);
            for (double& x : z) x = d(rng);
            double form = 0.0;
            for (int j = 0; j < 5; ++j) {
                for (int k = 0; k < 5; ++k) form += z[j] * g.at(j, k) * z[k];
            }
            CHECK(form >= -1e-9);
        }
    }
}

TEST_CASE("style transfer") {
    const nn::Network& net = model().net;
    const auto weights = nn::save_weights(net);
    const Image& content = test_image(3);

    const opt::StyleResult same = opt::style_transfer(net, content, content);
    CHECK(same.image == content);
    CHECK(same.losses.front() == 0.0);

    opt::StyleConfig no_style;
    no_style.style_weight = 0.0;
    CHECK(opt::style_transfer(net, content, stripes(16), no_style).image == content);

    opt::StyleConfig cfg;
    cfg.steps = 60;
    const opt::StyleResult r = opt::style_transfer(net, content, stripes(16), cfg);
    REQUIRE(r.losses.size() == 61);
    int down = 0;
    for (std::size_t i = 1; i < r.losses.size(); ++i) down += r.losses[i] < r.losses[i - 1];
    CHECK(down >= 54);
    CHECK(r.final_style_distance < r.initial_style_distance);
    CHECK(nn::save_weights(net) == weights);

    CHECK_THROWS_AS(opt::style_transfer(net, content, Image(12, 12, 1)), ShapeError);
    opt::StyleConfig bad;
    bad.layers = {{9}};
    CHECK_THROWS_AS(opt::style_transfer(net, content, stripes(16), bad), ArgumentError);
}
