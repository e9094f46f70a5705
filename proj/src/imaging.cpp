#include "cxr/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "cxr/error.hpp"
#include "cxr/fourier.hpp"

namespace cxr {

GrayImage::GrayImage(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width_ < 1 || height_ < 1) throw Error("image has a zero dimension");
    if (pixels_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
        throw Error("pixel count does not match image dimensions");
    }
    for (double v : pixels_) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw Error("intensity outside [0, 1]: " + std::to_string(v));
        }
    }
}

GrayImage::GrayImage(int width, int height, double fill)
    : GrayImage(width, height,
                std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                        static_cast<std::size_t>(std::max(height, 0)),
                                    fill)) {}

QuantizedImage::QuantizedImage(int width, int height, int levels, std::vector<int> bins)
    : width_(width), height_(height), levels_(levels), bins_(std::move(bins)) {
    if (width_ < 1 || height_ < 1) throw Error("image has a zero dimension");
    if (levels_ < 2) throw Error("levels must be >= 2");
    if (bins_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
        throw Error("bin count does not match image dimensions");
    }
    for (int b : bins_) {
        if (b < 0 || b >= levels_) throw Error("bin outside [0, levels)");
    }
}

void HefParams::validate() const {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(d0)) {
        throw Error("HEF parameters must be finite");
    }
    if (b < 0.0) throw Error("HEF gain b must be >= 0");
    if (d0 <= 0.0) throw Error("HEF cutoff d0 must be > 0");
}

QuantizedImage quantize(const GrayImage& img, int levels) {
    if (levels < 2) throw Error("levels must be >= 2");
    std::vector<int> bins(img.size());
    auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        const auto b = static_cast<int>(std::floor(px[i] * levels));
        bins[i] = std::clamp(b, 0, levels - 1);
    }
    return QuantizedImage(img.width(), img.height(), levels, std::move(bins));
}

GrayImage minmax_normalize(std::span<const double> values, int width, int height) {
    std::vector<double> out(values.size(), 0.0);
    if (!values.empty()) {
        auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
        const double lo = *lo_it;
        const double span = *hi_it - lo;
        // Spans at rounding level (e.g. a constant image after a transform
        // round trip) count as constant.
        const double tolerance = 1e-12 * std::max({1.0, std::abs(lo), std::abs(*hi_it)});
        if (span > tolerance) {
            for (std::size_t i = 0; i < values.size(); ++i) {
                out[i] = std::clamp((values[i] - lo) / span, 0.0, 1.0);
            }
        }
    }
    return GrayImage(width, height, std::move(out));
}

double hef_gain(const HefParams& params, double radius) {
    const double highpass = 1.0 - std::exp(-(radius * radius) / (2.0 * params.d0 * params.d0));
    return params.a + params.b * highpass;
}

Plane hef_response(const GrayImage& img, const HefParams& params) {
    params.validate();
    using fourier::Complex;
    const auto rows = fourier::next_pow2(static_cast<std::size_t>(img.height()));
    const auto cols = fourier::next_pow2(static_cast<std::size_t>(img.width()));

    // Padding replicates the nearest edge pixel so the border does not read
    // as a step edge to the high-pass term.
    std::vector<Complex> grid(rows * cols);
    for (std::size_t y = 0; y < rows; ++y) {
        const int sy = std::min(static_cast<int>(y), img.height() - 1);
        for (std::size_t x = 0; x < cols; ++x) {
            const int sx = std::min(static_cast<int>(x), img.width() - 1);
            grid[y * cols + x] = img.at(sx, sy);
        }
    }

    fourier::fft2(grid, rows, cols, false);
    for (std::size_t v = 0; v < rows; ++v) {
        const double fv = fourier::signed_frequency(v, rows);
        for (std::size_t u = 0; u < cols; ++u) {
            const double fu = fourier::signed_frequency(u, cols);
            grid[v * cols + u] *= hef_gain(params, std::hypot(fu, fv));
        }
    }
    fourier::fft2(grid, rows, cols, true);

    Plane out(img.height(), img.width());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            out(y, x) = grid[static_cast<std::size_t>(y) * cols + static_cast<std::size_t>(x)].real();
        }
    }
    return out;
}

GrayImage hef_filter(const GrayImage& img, const HefParams& params) {
    const Plane response = hef_response(img, params);
    GrayImage normalized = minmax_normalize(response.data, img.width(), img.height());
    if (!params.equalize) return normalized;
    return equalize_hist(normalized);
}

GrayImage equalize_hist(const GrayImage& img) {
    constexpr int kBins = 256;
    auto bin_of = [](double v) {
        return std::clamp(static_cast<int>(std::floor(v * kBins)), 0, kBins - 1);
    };

    std::array<std::size_t, kBins> hist{};
    for (double v : img.pixels()) ++hist[static_cast<std::size_t>(bin_of(v))];

    std::array<double, kBins> cdf{};
    std::size_t running = 0;
    const auto total = static_cast<double>(img.size());
    for (std::size_t b = 0; b < kBins; ++b) {
        running += hist[b];
        cdf[b] = static_cast<double>(running) / total;
    }

    std::vector<double> out(img.size());
    auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        out[i] = cdf[static_cast<std::size_t>(bin_of(px[i]))];
    }
    return GrayImage(img.width(), img.height(), std::move(out));
}

} // namespace cxr
