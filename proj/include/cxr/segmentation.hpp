#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "cxr/imaging.hpp"

namespace cxr {

/// Binary lung mask, row-major. Nonzero source pixels are foreground.
class LungMask {
public:
    LungMask() = default;
    LungMask(int width, int height, std::vector<std::uint8_t> bits);
    LungMask(int width, int height, bool fill);

    int width() const { return width_; }
    int height() const { return height_; }
    bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    bool contains(int x, int y) const {
        return x >= 0 && y >= 0 && x < width_ && y < height_ && at(x, y);
    }
    std::span<const std::uint8_t> bits() const { return bits_; }
    std::size_t count() const;

    void set(int x, int y, bool value) { bits_[static_cast<std::size_t>(y) * width_ + x] = value ? 1 : 0; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Position in image coordinates: `left` is the component with the smaller
/// centroid x, which is the patient's right lung on a PA radiograph.
enum class Side { left, right, whole };

std::string_view to_string(Side side);

struct BoundingBox {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0; // inclusive
    int y1 = 0; // inclusive

    int width() const { return x1 - x0 + 1; }
    int height() const { return y1 - y0 + 1; }
    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct RoiPixels {
    std::vector<int> bins; // row-major order within the mask
    BoundingBox box;
    Side side = Side::whole;
};

struct SideMask {
    Side side;
    LungMask mask;
};

/// Builds a mask from an image: nonzero intensity is foreground. Errors if the
/// dimensions differ from the expected ones or the mask is empty.
LungMask mask_from_image(const GrayImage& img, int expected_width, int expected_height);

LungMask load_mask(const std::filesystem::path& path, int expected_width, int expected_height);

/// 4-connected components, ordered by decreasing size (ties: first pixel in
/// row-major scan order first).
std::vector<LungMask> connected_components(const LungMask& mask);

/// Keeps the two largest components and names them by centroid x. With a
/// single component the whole mask comes back as one `Side::whole` entry.
std::vector<SideMask> split_lungs(const LungMask& mask);

RoiPixels extract_roi(const QuantizedImage& qimg, const LungMask& mask, Side side);

BoundingBox bounding_box(const LungMask& mask);

/// Otsu threshold over 256 bins, returned as an intensity in [0, 1].
double otsu_threshold(const GrayImage& img);

/// Fallback segmenter for runs without external masks: pixels darker than the
/// Otsu threshold, reduced to the two largest components.
LungMask otsu_lung_mask(const GrayImage& img);

} // namespace cxr
