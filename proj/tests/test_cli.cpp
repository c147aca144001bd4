#include <doctest.h>

#include "pixforge/cli.hpp"
#include "pixforge/image.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pixforge;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "pixforge");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

// Fresh scratch directory per test case.
struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("pixforge_cli_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string operator/(const std::string& leaf) const { return (dir / leaf).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

int lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

Image square_fixture() {
    Image img(32, 32, 1);
    for (int y = 10; y < 22; ++y) {
        for (int x = 10; x < 22; ++x) img.at(x, y) = 255;
    }
    return img;
}

}  // namespace

TEST_CASE("usage errors") {
    const Outcome none = run({});
    CHECK(none.code == cli::kUsage);
    CHECK(none.err.find("Subcommands") != std::string::npos);
    CHECK(run({"--help"}).code == cli::kOk);
    CHECK(run({"transmogrify"}).code == cli::kUsage);
    CHECK(run({"hist", "/nonexistent/file.pgm"}).code == cli::kUsage);
    CHECK(run({"pointop"}).code == cli::kUsage);

    Scratch s("usage");
    const std::string junk = s / "junk.pgm";
    std::ofstream(junk) << "not an image";
    const Outcome bad = run({"hist", junk});
    CHECK(bad.code == cli::kData);
    CHECK(bad.err.find("hist") != std::string::npos);
}

TEST_CASE("image subcommands") {
    Scratch s("image");
    const std::string in = s / "in.pgm";
    write_pnm_file(in, Image(2, 2, 1, {1, 2, 3, 4}));

    const Outcome h = run({"hist", in});
    CHECK(h.code == 0);
    CHECK(lines(h.out) == 257);
    CHECK(h.out.find("\n3,1\n") != std::string::npos);

    CHECK(run({"pointop", in, "-o", s / "p.pgm", "--gain", "2", "--bias", "1"}).code == 0);
    CHECK(read_pnm_file(s / "p.pgm") == Image(2, 2, 1, {3, 5, 7, 9}));

    CHECK(run({"warp", in, "-o", s / "r.pgm", "--rotate", "90", "--interp", "nearest"}).code == 0);
    CHECK(read_pnm_file(s / "r.pgm") == Image(2, 2, 1, {2, 4, 1, 3}));
    CHECK(run({"warp", in, "-o", s / "t.pgm", "--translate", "1,0", "--interp", "nearest"}).code == 0);
    CHECK(read_pnm_file(s / "t.pgm") == Image(2, 2, 1, {0, 1, 0, 3}));
    CHECK(run({"warp", in, "-o", s / "z.pgm", "--scale", "0,1"}).code == cli::kUsage);

    CHECK(run({"equalize", in, "-o", s / "e.pgm"}).code == 0);
    CHECK(read_pnm_file(s / "e.pgm").width() == 2);

    const std::string table = s / "table.pgm";
    write_pnm_file(table, Image(5, 5, 1, {3, 1, 7, 2, 1, 2, 1, 7, 2, 4, 5, 9, 6, 6, 7, 2, 1, 5, 7, 1, 3, 4, 1, 7, 3}));
    CHECK(run({"filter", table, "-o", s / "m.pgm", "--mask", "mean:3", "--border", "zero"}).code == 0);
    CHECK(read_pnm_file(s / "m.pgm").at(1, 1) == 5);
    CHECK(run({"filter", table, "-o", s / "m.pgm", "--mask", "median:3"}).code == cli::kUsage);
    const std::string mask = s / "mask.txt";
    std::ofstream(mask) << "3 1\n1 0 0\n";
    CHECK(run({"filter", table, "-o", s / "k.pgm", "--mask", "file:" + mask}).code == 0);
    CHECK(read_pnm_file(s / "k.pgm").at(0, 0) == 1);

    CHECK(run({"edges", table, "-o", s / "g.pgm", "--threshold", "0.5"}).code == 0);
}

TEST_CASE("spectral and corner subcommands") {
    Scratch s("fft");
    const std::string sq = s / "sq.pgm";
    write_pnm_file(sq, square_fixture());

    const Outcome csv = run({"fft", sq});
    CHECK(csv.code == 0);
    CHECK(csv.out.rfind("u,v,re,im\n", 0) == 0);
    CHECK(lines(csv.out) == 32 * 32 + 1);
    CHECK(run({"fft", sq, "--out-spectrum", s / "spec.pgm", "--lowpass", "0.3", "--out-filtered", s / "lp.pgm"}).code == 0);
    CHECK(read_pnm_file(s / "spec.pgm").width() == 32);
    CHECK(read_pnm_file(s / "lp.pgm").width() == 32);

    for (const char* det : {"moravec", "harris"}) {
        const Outcome c = run({"corners", sq, "--detector", det, "-o", s / "ann.pgm"});
        CHECK(c.code == 0);
        CHECK(lines(c.out) == 5);
    }
}

TEST_CASE("dataset generation is reproducible") {
    Scratch s("gen");
    REQUIRE(run({"gen-dataset", "-o", s / "a", "--n", "12", "--size", "12", "--seed", "3"}).code == 0);
    REQUIRE(run({"gen-dataset", "-o", s / "b", "--n", "12", "--size", "12", "--seed", "3"}).code == 0);
    int files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(s.dir / "a")) {
        if (!entry.is_regular_file()) continue;
        ++files;
        const fs::path twin = s.dir / "b" / fs::relative(entry.path(), s.dir / "a");
        CHECK(slurp(entry.path().string()) == slurp(twin.string()));
    }
    CHECK(files == 12);
    CHECK(run({"gen-dataset", "-o", s / "c", "--size", "8"}).code == cli::kUsage);
}

TEST_CASE("train, classify and the pixel optimizers end to end") {
    Scratch s("nn");
    REQUIRE(run({"gen-dataset", "-o", s / "data", "--n", "40", "--size", "12"}).code == 0);
    const Outcome t = run({"train", "--data", s / "data", "--epochs", "2", "-o", s / "m.pxf", "--metrics", s / "m.csv"});
    REQUIRE(t.code == 0);
    CHECK(lines(slurp(s / "m.csv")) == 3);
    CHECK(t.err.find("class 1: square") != std::string::npos);

    const std::string img = s / "data/square/00001.pgm";
    const Outcome c = run({"classify", "--model", s / "m.pxf", "--classes", "circle,square", img});
    CHECK(c.code == 0);
    CHECK(c.out.find(" circle=") != std::string::npos);
    CHECK(c.out.find("% square=") != std::string::npos);
    CHECK(run({"classify", "--model", s / "m.pxf", "--classes", "one", img}).code == cli::kUsage);
    CHECK(run({"classify", "--model", img, img}).code == cli::kData);

    CHECK(run({"attack", "--model", s / "m.pxf", img, "-o", s / "adv.pgm", "--eps", "0.1", "--label", "1"}).code == 0);
    CHECK(read_pnm_file(s / "adv.pgm").width() == 12);
    CHECK(run({"attack", "--model", s / "m.pxf", img, "-o", s / "adv.pgm", "--eps", "-1"}).code == cli::kUsage);

    const Outcome d = run({"dream", "--model", s / "m.pxf", img, "-o", s / "dream.pgm", "--layers", "0,1",
                           "--steps", "3", "--octaves", "2", "--csv", "-"});
    CHECK(d.code == 0);
    CHECK(lines(d.out) == 7);

    const Outcome st = run({"style", "--model", s / "m.pxf", "--content", img, "--style",
                            s / "data/circle/00000.pgm", "-o", s / "style.pgm", "--steps", "5", "--csv", "-"});
    CHECK(st.code == 0);
    CHECK(lines(st.out) == 7);
    CHECK(run({"train", "--data", s / "data", "--arch", "resnet", "-o", s / "x.pxf"}).code == cli::kUsage);
}
