// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "fixtures.hpp"
#include "gradient_cases.hpp"
#include "oracles.hpp"
#include "pixforge/features.hpp"
#include "pixforge/filter.hpp"
#include "pixforge/geometry.hpp"
#include "pixforge/image_opt.hpp"
#include "pixforge/spectral.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace pixforge;

namespace {

struct Verdict {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << " [failed: " << what << "]";
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double max_diff(const SpectralPlane& a, const SpectralPlane& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.coeffs()[i] - b.coeffs()[i]));
    return m;
}

Image square_fixture() {
    Image img(32, 32, 1);
    for (int y = 10; y < 22; ++y) {
        for (int x = 10; x < 22; ++x) img.at(x, y) = 255;
    }
    return img;
}

Image stripes(int side) {
    Image img(side, side, 1);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) img.at(x, y) = (x / 2) % 2 ? 230 : 20;
    }
    return img;
}

void mean_mask(Verdict& v) {
    const RealImage f = RealImage::from_rows(
        {{3, 1, 7, 2, 1}, {2, 1, 7, 2, 4}, {5, 9, 6, 6, 7}, {2, 1, 5, 7, 1}, {3, 4, 1, 7, 3}});
    const auto t0 = Clock::now();
    const double got = convolve(f, mean_kernel(3), BorderMode::ZeroPad).at(1, 1);
    const double dt = seconds_since(t0);
    v.detail << "out(1,1)=" << got << " err=" << std::abs(got - 41.0 / 9.0) << " time=" << dt << "s";
    v.require(std::abs(got - 41.0 / 9.0) < 1e-12, "value");
    v.require(dt < 1.0, "runtime");
}

void dft(Verdict& v) {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2);
    const RealImage f8 = oracle::random_plane(rng, 8, 8, -1, 1);
    const double e_lit = max_diff(dft2(f8), SpectralPlane(8, 8, oracle::literal_dft(f8)));

    const RealImage f16 = oracle::random_plane(rng, 16, 16);
    const SpectralPlane t = dft2(f16);
    const RealImage back = idft2(t);
    double e_rt = 0.0, ef = 0.0, et = 0.0;
    for (std::size_t i = 0; i < f16.size(); ++i) {
        e_rt = std::max(e_rt, std::abs(back.data()[i] - f16.data()[i]));
        ef += f16.data()[i] * f16.data()[i];
    }
    for (auto c : t.coeffs()) et += std::norm(c);
    const double e_pars = std::abs(ef - et) / ef;
    const double dt = seconds_since(t0);
    v.detail << "literal=" << e_lit << " roundtrip=" << e_rt << " parseval=" << e_pars << " time=" << dt << "s";
    v.require(e_lit < 1e-10, "literal sum");
    v.require(e_rt < 1e-9, "round trip");
    v.require(e_pars < 1e-8, "Parseval");
    v.require(dt < 5.0, "runtime");
}

void fft(Verdict& v) {
    std::mt19937_64 rng(3);
    double worst = 0.0;
    for (int w = 2; w <= 64; w *= 2) {
        for (int h = 2; h <= 64; h *= 2) {
            const RealImage f = oracle::random_plane(rng, w, h);
            worst = std::max(worst, max_diff(fft2(f), dft2(f)));
        }
    }
    const RealImage big = oracle::random_plane(rng, 256, 256);
    const auto t0 = Clock::now();
    const SpectralPlane t = fft2(big);
    const double dt = seconds_since(t0);
    v.detail << "max|fft-dft|=" << worst << " fft2(256x256)=" << dt << "s";
    v.require(worst < 1e-9, "agreement");
    v.require(t.size() == 256u * 256u && dt < 1.0, "runtime");
}

void gradients(Verdict& v) {
    const auto t0 = Clock::now();
    double worst = 0.0;
    int checks = 0;
    std::string worst_name;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        gradcase::for_each_case(seed, [&](const char* name, gradcase::Leaves leaves, const gradcase::Fn& f) {
            const double e = oracle::gradient_error(std::move(leaves), f);
            ++checks;
            if (e > worst) {
                worst = e;
                worst_name = name;
            }
        });
    }
    const double dt = seconds_since(t0);
    v.detail << checks << " checks over 20 seeds, worst rel err=" << worst << " (" << worst_name << ") time=" << dt
             << "s";
    v.require(worst < 1e-5, "relative error");
    v.require(dt < 30.0, "runtime");
}

void training(Verdict& v) {
    const auto t0 = Clock::now();
    const fixture::ShapesModel& m = fixture::shapes_model();
    const double dt = seconds_since(t0);
    const fixture::ShapesModel again = fixture::train_shapes_model();
    const auto& last = m.metrics.epochs.back();
    v.detail << m.data.train.items.size() << "/" << m.data.test.items.size() << " split, " << m.metrics.epochs.size()
             << " epochs, test acc=" << last.test_accuracy << " time=" << dt << "s";
    v.require(m.data.train.items.size() == 400 && m.data.test.items.size() == 100, "split sizes");
    v.require(m.metrics.epochs.size() <= 30 && last.test_accuracy >= 0.90, "accuracy");
    v.require(dt < 300.0, "runtime");
    v.require(again.metrics == m.metrics && nn::save_weights(again.net) == nn::save_weights(m.net), "rerun bit-exact");
}

void fgsm(Verdict& v) {
    const fixture::ShapesModel& m = fixture::shapes_model();
    const auto weights = nn::save_weights(m.net);
    std::vector<nn::LabeledImage> attacked;
    bool identity = true;
    for (const auto& it : m.data.test.items) {
        attacked.push_back({opt::fgsm_attack(m.net, it.image, it.label, 0.1), it.label});
        identity = identity && opt::fgsm_attack(m.net, it.image, it.label, 0.0) == it.image;
    }
    const double clean = fixture::accuracy(m.net, m.data.test.items);
    const double adv = fixture::accuracy(m.net, attacked);
    v.detail << "clean acc=" << clean << " attacked acc=" << adv << " drop=" << 100.0 * (clean - adv) << "pp";
    v.require(clean - adv >= 0.30, "accuracy drop");
    v.require(identity, "eps=0 identity");
    v.require(nn::save_weights(m.net) == weights, "weights unchanged");
}

void dream(Verdict& v) {
    const fixture::ShapesModel& m = fixture::shapes_model();
    const Image& img = m.data.test.items.front().image;
    const opt::LayerSelection layers{{0, 1}};
    const ag::Shape shape{1, fixture::kSide, fixture::kSide};
    const ag::Tensor t0 = nn::image_tensor(img);
    std::vector<double> px(t0.values().begin(), t0.values().end());
    const double start = opt::activation_norm(m.net, px, shape, layers);
    bool monotone = true, in_range = true;
    double norm = start;
    for (int s = 0; s < 20; ++s) {
        const opt::DreamStep st = opt::dream_step(m.net, px, shape, layers, opt::DreamConfig{}.lr);
        monotone = monotone && st.norm_after >= norm;
        norm = st.norm_after;
        px = st.pixels;
        for (double p : px) in_range = in_range && p >= 0.0 && p <= 1.0;
    }
    const opt::DreamResult pyramid = opt::deep_dream(m.net, img, layers);
    v.detail << "20 steps: norm " << start << " -> " << norm << "; 3-octave run: " << pyramid.initial_norm << " -> "
             << pyramid.final_norm;
    v.require(norm > start && monotone, "single-scale ascent");
    v.require(pyramid.final_norm > pyramid.initial_norm, "octave ascent");
    v.require(in_range && pyramid.image.width() == img.width(), "valid pixels");
}

void style(Verdict& v) {
    const fixture::ShapesModel& m = fixture::shapes_model();
    const Image& content = m.data.test.items.front().image;
    const opt::StyleResult r = opt::style_transfer(m.net, content, stripes(fixture::kSide));
    int down = 0;
    for (std::size_t i = 1; i < r.losses.size(); ++i) down += r.losses[i] < r.losses[i - 1];
    const int steps = static_cast<int>(r.losses.size()) - 1;
    const opt::StyleResult same = opt::style_transfer(m.net, content, content);
    v.detail << "loss fell in " << down << "/" << steps << " steps, style distance " << r.initial_style_distance
             << " -> " << r.final_style_distance;
    v.require(steps == 200 && down >= 180, "loss decrease");
    v.require(r.final_style_distance < r.initial_style_distance, "style distance");
    v.require(same.image == content, "style = content identity");
}

void corners(Verdict& v) {
    const Image sq = square_fixture();
    const auto near_vertices = [](const std::vector<Corner>& cs) {
        if (cs.size() != 4) return false;
        for (double vx : {9.5, 21.5}) {
            for (double vy : {9.5, 21.5}) {
                int hits = 0;
                for (const auto& c : cs) hits += std::abs(c.x - vx) <= 2.0 && std::abs(c.y - vy) <= 2.0;
                if (hits != 1) return false;
            }
        }
        return true;
    };
    const auto mor = moravec(sq), har = harris(sq);
    const Image flat(32, 32, 1, std::vector<std::uint8_t>(32 * 32, 128));
    Image step(32, 32, 1);
    for (int y = 0; y < 32; ++y) {
        for (int x = 16; x < 32; ++x) step.at(x, y) = 255;
    }
    const std::size_t spurious = moravec(flat).size() + harris(flat).size() + moravec(step).size() + harris(step).size();
    v.detail << "moravec=" << mor.size() << " harris=" << har.size() << " on flat/step=" << spurious;
    v.require(near_vertices(mor), "moravec");
    v.require(near_vertices(har), "harris");
    v.require(spurious == 0, "no corners on flat or step");
}

void geometry(Verdict& v) {
    std::mt19937_64 rng(10);
    std::uniform_int_distribution<int> px(0, 255);
    bool exact = true;
    for (auto [w, h] : {std::pair{17, 17}, std::pair{32, 32}, std::pair{8, 8}}) {
        Image img(w, h, 1);
        for (auto& p : img.data()) p = static_cast<std::uint8_t>(px(rng));
        const AffineMap r = center_rotation(90, w, h);
        Image turned = img;
        for (int i = 0; i < 4; ++i) turned = warp(turned, r, InterpMode::Nearest, {w, h});
        exact = exact && turned == img;
    }
    const RealImage f = oracle::random_plane(rng, 9, 7);
    std::uniform_real_distribution<double> ux(0, 8), uy(0, 6);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double x = ux(rng), y = uy(rng);
        worst = std::max(worst, std::abs(interpolate(f, x, y, InterpMode::Bilinear) - oracle::bilinear_by_solve(f, x, y)));
    }
    v.detail << "4x90deg exact=" << (exact ? "yes" : "no") << " bilinear max err=" << worst;
    v.require(exact, "rotation round trip");
    v.require(worst < 1e-10, "bilinear");
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void(Verdict&)>>> criteria{
        {"mean mask on the 5x5 fixture", mean_mask},
        {"DFT against the literal sum", dft},
        {"FFT equivalence and speed", fft},
        {"finite-difference gradient suite", gradients},
        {"small CNN training", training},
        {"FGSM attack", fgsm},
        {"deep dream ascent", dream},
        {"style transfer descent", style},
        {"Moravec and Harris corners", corners},
        {"rotation and bilinear geometry", geometry},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            criteria[i].second(v);
        } catch (const std::exception& e) {
            v.ok = false;
            v.detail << " [exception: " << e.what() << "]";
        }
        failed += !v.ok;
        std::printf("%s %zu %s: %s\n", v.ok ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
