#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "cxr/error.hpp"
#include "cxr/fourier.hpp"
#include "cxr/imaging.hpp"
#include "test_support.hpp"

using namespace cxr;
using cxr::testing::TempDir;

namespace {

// Unnormalized direct DFT, O(N^4). Independent of the radix-2 path.
std::vector<std::complex<double>> naive_dft2(const std::vector<double>& x, int rows, int cols) {
    std::vector<std::complex<double>> out(x.size());
    for (int v = 0; v < rows; ++v) {
        for (int u = 0; u < cols; ++u) {
            std::complex<double> acc = 0.0;
            for (int y = 0; y < rows; ++y) {
                for (int xx = 0; xx < cols; ++xx) {
                    const double angle = -2.0 * std::numbers::pi *
                                         (static_cast<double>(u * xx) / cols + static_cast<double>(v * y) / rows);
                    acc += x[static_cast<std::size_t>(y) * cols + xx] * std::polar(1.0, angle);
                }
            }
            out[static_cast<std::size_t>(v) * cols + u] = acc;
        }
    }
    return out;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("load_image reads an 8-bit PNG") {
    TempDir dir;
    save_png(dir / "flat.png", GrayImage(4, 4, 128.0 / 255.0));
    const GrayImage img = load_image(dir / "flat.png");
    CHECK(img.width() == 4);
    CHECK(img.height() == 4);
    for (double v : img.pixels()) CHECK(v == doctest::Approx(128.0 / 255.0).epsilon(1e-12));
}

TEST_CASE("load_image reports missing files") {
    CHECK_THROWS_WITH_AS(load_image("/nonexistent/nowhere.png"), doctest::Contains("file not found"), Error);
}

TEST_CASE("load_image reads a 16-bit PGM") {
    TempDir dir;
    // Written byte by byte here rather than through save_pgm.
    std::string bytes = "P5\n# one hot\n3 2\n65535\n";
    for (int i = 0; i < 6; ++i) {
        if (i == 4) {
            bytes += static_cast<char>(0xff);
            bytes += static_cast<char>(0xff);
        } else {
            bytes += '\0';
            bytes += '\0';
        }
    }
    cxr::testing::write_bytes(dir / "one.pgm", bytes);
    const GrayImage img = load_image(dir / "one.pgm");
    REQUIRE(img.size() == 6);
    for (int i = 0; i < 6; ++i) CHECK(img.pixels()[static_cast<std::size_t>(i)] == (i == 4 ? 1.0 : 0.0));
}

TEST_CASE("load_image rejects unsupported and zero-sized inputs") {
    TempDir dir;
    cxr::testing::write_bytes(dir / "x.bmp", "BM not an image");
    CHECK_THROWS_WITH_AS(load_image(dir / "x.bmp"), doctest::Contains("unsupported format"), Error);
    cxr::testing::write_bytes(dir / "zero.pgm", "P5\n0 4\n255\n");
    CHECK_THROWS_WITH_AS(load_image(dir / "zero.pgm"), doctest::Contains("zero-dimension"), Error);
}

TEST_CASE("PGM write/read round trip at both depths") {
    TempDir dir;
    Rng rng(3);
    const GrayImage img = cxr::testing::random_image(7, 5, rng);
    for (int maxval : {255, 65535}) {
        save_pgm(dir / "rt.pgm", img, maxval);
        const GrayImage back = load_image(dir / "rt.pgm");
        CHECK(max_abs_diff(img.pixels(), back.pixels()) <= 0.5 / maxval + 1e-12);
    }
}

TEST_CASE("GrayImage validates its invariants") {
    CHECK_THROWS_AS(GrayImage(0, 3, 0.0), Error);
    CHECK_THROWS_AS(GrayImage(2, 2, std::vector<double>{0.0, 0.5, 1.5, 0.0}), Error);
    CHECK_THROWS_AS(GrayImage(2, 1, std::vector<double>{0.0, NAN}), Error);
    CHECK_THROWS_AS(GrayImage(2, 2, std::vector<double>{0.0}), Error);
}

TEST_CASE("quantize maps intensities by equal-width bins") {
    CHECK_THROWS_AS(quantize(GrayImage(2, 2, 0.5), 1), Error);

    const QuantizedImage zeros = quantize(GrayImage(3, 3, 0.0), 100);
    for (int b : zeros.bins()) CHECK(b == 0);

    const QuantizedImage two = quantize(GrayImage(2, 1, std::vector<double>{0.0, 1.0}), 2);
    CHECK(two.bins()[0] == 0);
    CHECK(two.bins()[1] == 1);

    std::vector<double> ramp(256);
    for (int i = 0; i < 256; ++i) ramp[static_cast<std::size_t>(i)] = i / 255.0;
    const QuantizedImage q = quantize(GrayImage(256, 1, ramp), 100);
    for (int i = 0; i < 256; ++i) {
        const int expected = std::min(99, static_cast<int>(std::floor(ramp[static_cast<std::size_t>(i)] * 100.0)));
        CHECK(q.bins()[static_cast<std::size_t>(i)] == expected);
    }
}

TEST_CASE("quantize is monotone over random images") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const GrayImage img = cxr::testing::random_image(9, 9, rng);
        const int levels = 2 + static_cast<int>(rng.below(200));
        const QuantizedImage q = quantize(img, levels);
        auto px = img.pixels();
        for (std::size_t i = 0; i < px.size(); ++i) {
            for (std::size_t j = 0; j < px.size(); ++j) {
                if (px[i] <= px[j]) REQUIRE(q.bins()[i] <= q.bins()[j]);
            }
        }
    }
}

TEST_CASE("fft then inverse fft reproduces the input") {
    Rng rng(5);
    for (std::size_t n : {1u, 2u, 8u, 64u, 256u}) {
        std::vector<fourier::Complex> grid(n * n);
        for (auto& c : grid) c = {rng.uniform(), rng.uniform()};
        const auto original = grid;
        fourier::fft2(grid, n, n, false);
        fourier::fft2(grid, n, n, true);
        double err = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) err = std::max(err, std::abs(grid[i] - original[i]));
        CHECK(err <= 1e-9);
    }
    std::vector<fourier::Complex> bad(6);
    CHECK_THROWS_AS(fourier::fft(bad, false), Error);
}

TEST_CASE("fft matches the direct DFT") {
    Rng rng(8);
    const int n = 8;
    std::vector<double> x(n * n);
    for (auto& v : x) v = rng.uniform();
    std::vector<fourier::Complex> grid(x.begin(), x.end());
    fourier::fft2(grid, n, n, false);
    const auto ref = naive_dft2(x, n, n);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(grid[i] - ref[i]) <= 1e-10);
}

TEST_CASE("hef_filter on a constant image gives zeros") {
    HefParams p{1.0, 1.0, 0.05, false};
    const GrayImage out = hef_filter(GrayImage(16, 12, 0.4), p);
    for (double v : out.pixels()) CHECK(v == 0.0);
}

TEST_CASE("hef_filter with a=1, b=0 is min-max renormalization") {
    Rng rng(21);
    HefParams p{1.0, 0.0, 0.05, false};
    for (auto [w, h] : {std::pair{16, 16}, std::pair{13, 7}, std::pair{40, 33}}) {
        std::vector<double> px(static_cast<std::size_t>(w * h));
        for (auto& v : px) v = rng.uniform();
        px[0] = 0.0;
        px[1] = 1.0;
        const GrayImage img(w, h, px);
        const GrayImage out = hef_filter(img, p);
        CHECK(max_abs_diff(out.pixels(), img.pixels()) <= 1e-9);
    }
}

TEST_CASE("hef impulse response spectrum equals the transfer function") {
    const int n = 32;
    std::vector<double> px(n * n, 0.0);
    px[16 * n + 16] = 1.0;
    const GrayImage impulse(n, n, px);
    const HefParams p{0.5, 2.0, 0.125, false};

    const Plane response = hef_response(impulse, p);
    const auto spectrum = naive_dft2(response.data, n, n);
    for (int v = 0; v < n; ++v) {
        for (int u = 0; u < n; ++u) {
            const double fu = (u < n / 2 ? u : u - n) / static_cast<double>(n);
            const double fv = (v < n / 2 ? v : v - n) / static_cast<double>(n);
            const double h = p.a + p.b * (1.0 - std::exp(-(fu * fu + fv * fv) / (2.0 * p.d0 * p.d0)));
            // Normalized-DFT magnitudes: |X| / N^2 against H / N^2.
            const double got = std::abs(spectrum[static_cast<std::size_t>(v * n + u)]) / (n * n);
            CHECK(std::abs(got - h / (n * n)) <= 1e-9);
        }
    }
}

TEST_CASE("hef output stays finite and in range") {
    Rng rng(4);
    for (int trial = 0; trial < 5; ++trial) {
        const GrayImage img = cxr::testing::random_image(20 + trial, 17, rng);
        const GrayImage out = hef_filter(img, HefParams{});
        for (double v : out.pixels()) {
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK_THROWS_AS(hef_filter(GrayImage(4, 4, 0.1), HefParams{0.5, -1.0, 0.05, false}), Error);
    CHECK_THROWS_AS(hef_filter(GrayImage(4, 4, 0.1), HefParams{0.5, 1.0, 0.0, false}), Error);
}

TEST_CASE("equalize_hist") {
    SUBCASE("uniform histogram is a fixed point within one bin") {
        std::vector<double> px(256);
        for (int i = 0; i < 256; ++i) px[static_cast<std::size_t>(i)] = (i + 0.5) / 256.0;
        const GrayImage img(16, 16, px);
        CHECK(max_abs_diff(equalize_hist(img).pixels(), img.pixels()) <= 1.0 / 256.0);
    }
    SUBCASE("constant image stays constant") {
        const GrayImage out = equalize_hist(GrayImage(5, 5, 0.3));
        for (double v : out.pixels()) CHECK(v == out.pixels()[0]);
    }
    SUBCASE("two-level image maps to its CDF values") {
        std::vector<double> px(100, 0.8);
        for (int i = 0; i < 25; ++i) px[static_cast<std::size_t>(i * 4)] = 0.2;
        const GrayImage out = equalize_hist(GrayImage(10, 10, px));
        for (std::size_t i = 0; i < px.size(); ++i) CHECK(out.pixels()[i] == (px[i] == 0.2 ? 0.25 : 1.0));
    }
}
