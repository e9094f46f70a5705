#include "cxr/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "cxr/error.hpp"

namespace cxr {

LungMask::LungMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
    if (width_ < 1 || height_ < 1) throw Error("mask has a zero dimension");
    if (bits_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
        throw Error("mask size does not match its dimensions");
    }
    for (auto& b : bits_) b = b ? 1 : 0;
}

LungMask::LungMask(int width, int height, bool fill)
    : LungMask(width, height,
               std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                             static_cast<std::size_t>(std::max(height, 0)),
                                         fill ? 1 : 0)) {}

std::size_t LungMask::count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::string_view to_string(Side side) {
    switch (side) {
        case Side::left: return "left";
        case Side::right: return "right";
        case Side::whole: return "whole";
    }
    return "whole";
}

LungMask mask_from_image(const GrayImage& img, int expected_width, int expected_height) {
    if (img.width() != expected_width || img.height() != expected_height) {
        throw Error("mask dimension mismatch: got " + std::to_string(img.width()) + "x" +
                    std::to_string(img.height()) + ", expected " + std::to_string(expected_width) +
                    "x" + std::to_string(expected_height));
    }
    std::vector<std::uint8_t> bits(img.size());
    auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) bits[i] = px[i] > 0.0 ? 1 : 0;
    LungMask mask(img.width(), img.height(), std::move(bits));
    if (mask.count() == 0) throw SegmentationError("empty mask");
    return mask;
}

LungMask load_mask(const std::filesystem::path& path, int expected_width, int expected_height) {
    return mask_from_image(load_image(path), expected_width, expected_height);
}

std::vector<LungMask> connected_components(const LungMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    std::vector<std::vector<std::size_t>> members;
    std::vector<std::size_t> stack;

    for (std::size_t start = 0; start < label.size(); ++start) {
        if (!mask.bits()[start] || label[start] >= 0) continue;
        const int id = static_cast<int>(members.size());
        members.emplace_back();
        label[start] = id;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t idx = stack.back();
            stack.pop_back();
            members.back().push_back(idx);
            const int x = static_cast<int>(idx % w);
            const int y = static_cast<int>(idx / w);
            const std::array<std::array<int, 2>, 4> neighbours{{{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}}};
            for (auto [nx, ny] : neighbours) {
                if (!mask.contains(nx, ny)) continue;
                const std::size_t n = static_cast<std::size_t>(ny) * w + nx;
                if (label[n] >= 0) continue;
                label[n] = id;
                stack.push_back(n);
            }
        }
    }

    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return members[a].size() > members[b].size();
    });

    std::vector<LungMask> out;
    out.reserve(order.size());
    for (std::size_t id : order) {
        LungMask component(w, h, false);
        for (std::size_t idx : members[id]) {
            component.set(static_cast<int>(idx % w), static_cast<int>(idx / w), true);
        }
        out.push_back(std::move(component));
    }
    return out;
}

namespace {

double centroid_x(const LungMask& mask) {
    double sum = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y)) {
                sum += x;
                ++n;
            }
        }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

} // namespace

std::vector<SideMask> split_lungs(const LungMask& mask) {
    if (mask.count() == 0) throw SegmentationError("empty mask");
    auto components = connected_components(mask);
    if (components.size() == 1) return {SideMask{Side::whole, std::move(components.front())}};

    LungMask& first = components[0];
    LungMask& second = components[1];
    if (centroid_x(first) <= centroid_x(second)) {
        return {SideMask{Side::left, std::move(first)}, SideMask{Side::right, std::move(second)}};
    }
    return {SideMask{Side::left, std::move(second)}, SideMask{Side::right, std::move(first)}};
}

BoundingBox bounding_box(const LungMask& mask) {
    BoundingBox box{mask.width(), mask.height(), -1, -1};
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) continue;
            box.x0 = std::min(box.x0, x);
            box.y0 = std::min(box.y0, y);
            box.x1 = std::max(box.x1, x);
            box.y1 = std::max(box.y1, y);
        }
    }
    if (box.x1 < 0) throw SegmentationError("empty selection");
    return box;
}

RoiPixels extract_roi(const QuantizedImage& qimg, const LungMask& mask, Side side) {
    if (qimg.width() != mask.width() || qimg.height() != mask.height()) {
        throw Error("mask dimension mismatch");
    }
    RoiPixels roi;
    roi.side = side;
    roi.box = bounding_box(mask);
    for (int y = roi.box.y0; y <= roi.box.y1; ++y) {
        for (int x = roi.box.x0; x <= roi.box.x1; ++x) {
            if (mask.at(x, y)) roi.bins.push_back(qimg.at(x, y));
        }
    }
    return roi;
}

double otsu_threshold(const GrayImage& img) {
    constexpr int kBins = 256;
    std::array<double, kBins> hist{};
    for (double v : img.pixels()) {
        hist[static_cast<std::size_t>(std::clamp(static_cast<int>(v * kBins), 0, kBins - 1))] += 1.0;
    }
    const auto total = static_cast<double>(img.size());
    double sum_all = 0.0;
    for (int b = 0; b < kBins; ++b) sum_all += b * hist[static_cast<std::size_t>(b)];

    double weight_bg = 0.0;
    double sum_bg = 0.0;
    double best_between = -1.0;
    int best_bin = 0;
    for (int b = 0; b < kBins; ++b) {
        weight_bg += hist[static_cast<std::size_t>(b)];
        if (weight_bg == 0.0) continue;
        const double weight_fg = total - weight_bg;
        if (weight_fg == 0.0) break;
        sum_bg += b * hist[static_cast<std::size_t>(b)];
        const double mean_bg = sum_bg / weight_bg;
        const double mean_fg = (sum_all - sum_bg) / weight_fg;
        const double between = weight_bg * weight_fg * (mean_bg - mean_fg) * (mean_bg - mean_fg);
        if (between > best_between) {
            best_between = between;
            best_bin = b;
        }
    }
    // Threshold sits at the upper edge of the last background bin.
    return static_cast<double>(best_bin + 1) / kBins;
}

LungMask otsu_lung_mask(const GrayImage& img) {
    const double threshold = otsu_threshold(img);
    std::vector<std::uint8_t> bits(img.size());
    auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) bits[i] = px[i] < threshold ? 1 : 0;
    LungMask dark(img.width(), img.height(), std::move(bits));
    if (dark.count() == 0) throw SegmentationError("segmentation failed: no pixels below the Otsu threshold");

    auto components = connected_components(dark);
    LungMask out(img.width(), img.height(), false);
    for (std::size_t c = 0; c < std::min<std::size_t>(2, components.size()); ++c) {
        auto bits_c = components[c].bits();
        for (std::size_t i = 0; i < bits_c.size(); ++i) {
            if (bits_c[i]) out.set(static_cast<int>(i % img.width()), static_cast<int>(i / img.width()), true);
        }
    }
    return out;
}

} // namespace cxr
