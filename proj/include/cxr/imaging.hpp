#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cxr/plane.hpp"

namespace cxr {

/// Grayscale image with intensities in [0, 1], row-major.
class GrayImage {
public:
    GrayImage() = default;
    /// Throws cxr::Error if a dimension is zero, the pixel count is wrong, or
    /// an intensity is non-finite or outside [0, 1].
    GrayImage(int width, int height, std::vector<double> pixels);
    GrayImage(int width, int height, double fill);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return pixels_.size(); }
    double at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    std::span<const double> pixels() const { return pixels_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> pixels_;
};

/// Image of gray-level bin indices in [0, levels).
class QuantizedImage {
public:
    QuantizedImage() = default;
    QuantizedImage(int width, int height, int levels, std::vector<int> bins);

    int width() const { return width_; }
    int height() const { return height_; }
    int levels() const { return levels_; }
    int at(int x, int y) const { return bins_[static_cast<std::size_t>(y) * width_ + x]; }
    std::span<const int> bins() const { return bins_; }

private:
    int width_ = 0;
    int height_ = 0;
    int levels_ = 0;
    std::vector<int> bins_;
};

/// High-frequency emphasis filter parameters.
/// H(D) = a + b * (1 - exp(-D^2 / (2 d0^2))), D in cycles per sample.
struct HefParams {
    double a = 0.5;
    double b = 2.0;
    double d0 = 0.05;
    bool equalize = true;

    void validate() const;
};

// --- I/O -------------------------------------------------------------------

/// Reads an 8/16-bit PNG (gray or color, color converted by luma) or a binary
/// PGM (P5). Intensities are scaled by the format's maximum value.
GrayImage load_image(const std::filesystem::path& path);

/// Same as load_image, from an in-memory file. Format is sniffed from the
/// magic bytes.
GrayImage decode_image(std::span<const std::uint8_t> bytes);

/// Writes a binary PGM with the given maximum value (255 or 65535).
void save_pgm(const std::filesystem::path& path, const GrayImage& img, int maxval = 255);

/// Writes an 8-bit grayscale PNG.
void save_png(const std::filesystem::path& path, const GrayImage& img);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

// --- Processing ------------------------------------------------------------

/// Equal-width binning: bin = min(floor(v * levels), levels - 1).
QuantizedImage quantize(const GrayImage& img, int levels);

/// Linear rescale to [0, 1]. A constant image maps to all zeros.
GrayImage minmax_normalize(std::span<const double> values, int width, int height);

/// Filter transfer value at radial frequency `radius` (cycles per sample).
double hef_gain(const HefParams& params, double radius);

/// Filtered image before renormalization: real part of IDFT(DFT(img) * H)
/// on the next power-of-two grid (edge-replicated padding), cropped back.
Plane hef_response(const GrayImage& img, const HefParams& params);

/// Full enhancement: hef_response, min-max renormalization, and optionally
/// histogram equalization.
GrayImage hef_filter(const GrayImage& img, const HefParams& params);

/// CDF equalization over 256 bins; each pixel maps to the CDF of its bin.
GrayImage equalize_hist(const GrayImage& img);

} // namespace cxr
