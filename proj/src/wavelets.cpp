#include "cxr/wavelets.hpp"

#include <cmath>
#include <span>

#include "cxr/error.hpp"

namespace cxr {

namespace {

struct FilterBank {
    std::vector<double> low;
    std::vector<double> high;
};

const FilterBank& filters(Wavelet w) {
    static const FilterBank haar = [] {
        const double s = 1.0 / std::sqrt(2.0);
        return FilterBank{{s, s}, {s, -s}};
    }();
    static const FilterBank db4 = [] {
        const double r3 = std::sqrt(3.0);
        const double n = 4.0 * std::sqrt(2.0);
        std::vector<double> h{(1 + r3) / n, (3 + r3) / n, (3 - r3) / n, (1 - r3) / n};
        // Quadrature mirror: g[k] = (-1)^k h[L-1-k].
        std::vector<double> g(h.size());
        for (std::size_t k = 0; k < h.size(); ++k) {
            g[k] = ((k % 2) ? -1.0 : 1.0) * h[h.size() - 1 - k];
        }
        return FilterBank{h, g};
    }();
    return w == Wavelet::haar ? haar : db4;
}

// One analysis step on a strided 1-D signal of length n; writes ceil(n/2)
// low and high coefficients.
void analyze(std::span<const double> x, const FilterBank& fb, std::vector<double>& low,
             std::vector<double>& high) {
    const std::size_t n = x.size();
    const std::size_t half = (n + 1) / 2;
    const std::size_t padded = 2 * half;
    low.assign(half, 0.0);
    high.assign(half, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        double a = 0.0;
        double d = 0.0;
        for (std::size_t k = 0; k < fb.low.size(); ++k) {
            const std::size_t idx = (2 * i + k) % padded;
            const double v = idx < n ? x[idx] : 0.0;
            a += fb.low[k] * v;
            d += fb.high[k] * v;
        }
        low[i] = a;
        high[i] = d;
    }
}

void synthesize(std::span<const double> low, std::span<const double> high, const FilterBank& fb,
                std::vector<double>& x, std::size_t n) {
    const std::size_t half = low.size();
    const std::size_t padded = 2 * half;
    std::vector<double> full(padded, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        for (std::size_t k = 0; k < fb.low.size(); ++k) {
            full[(2 * i + k) % padded] += fb.low[k] * low[i] + fb.high[k] * high[i];
        }
    }
    x.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(n));
}

int half_size(int n) { return (n + 1) / 2; }

} // namespace

std::string_view to_string(Wavelet w) { return w == Wavelet::haar ? "haar" : "db4"; }

Wavelet wavelet_from_string(std::string_view name) {
    if (name == "haar") return Wavelet::haar;
    if (name == "db4" || name == "daubechies4") return Wavelet::db4;
    throw Error("unknown wavelet: " + std::string(name));
}

void WaveletConfig::validate() const {
    if (levels < 1) throw Error("wavelet levels must be >= 1");
    if (!(k_sigma > 0.0)) throw Error("k_sigma must be > 0");
}

WaveletPyramid dwt2(const Plane& img, Wavelet wavelet, int levels) {
    if (levels < 1) throw Error("wavelet levels must be >= 1");
    if (std::min(img.rows, img.cols) < (1 << levels)) {
        throw Error("image too small for " + std::to_string(levels) + " decomposition levels");
    }
    const FilterBank& fb = filters(wavelet);
    WaveletPyramid pyr;
    pyr.wavelet = wavelet;

    Plane current = img;
    std::vector<double> row, low, high;
    for (int level = 0; level < levels; ++level) {
        const int rows = current.rows;
        const int cols = current.cols;
        const int hr = half_size(rows);
        const int hc = half_size(cols);

        Plane xlow(rows, hc), xhigh(rows, hc);
        for (int r = 0; r < rows; ++r) {
            std::span<const double> line(current.data.data() + static_cast<std::size_t>(r) * cols,
                                         static_cast<std::size_t>(cols));
            analyze(line, fb, low, high);
            for (int c = 0; c < hc; ++c) {
                xlow(r, c) = low[static_cast<std::size_t>(c)];
                xhigh(r, c) = high[static_cast<std::size_t>(c)];
            }
        }

        WaveletLevel out{rows, cols, Plane(hr, hc), Plane(hr, hc), Plane(hr, hc)};
        Plane ll(hr, hc);
        std::vector<double> column(static_cast<std::size_t>(rows));
        for (int c = 0; c < hc; ++c) {
            for (int r = 0; r < rows; ++r) column[static_cast<std::size_t>(r)] = xlow(r, c);
            analyze(column, fb, low, high);
            for (int r = 0; r < hr; ++r) {
                ll(r, c) = low[static_cast<std::size_t>(r)];
                out.lh(r, c) = high[static_cast<std::size_t>(r)];
            }
            for (int r = 0; r < rows; ++r) column[static_cast<std::size_t>(r)] = xhigh(r, c);
            analyze(column, fb, low, high);
            for (int r = 0; r < hr; ++r) {
                out.hl(r, c) = low[static_cast<std::size_t>(r)];
                out.hh(r, c) = high[static_cast<std::size_t>(r)];
            }
        }
        pyr.levels.push_back(std::move(out));
        current = std::move(ll);
    }
    pyr.approximation = std::move(current);
    return pyr;
}

Plane idwt2(const WaveletPyramid& pyramid) {
    if (pyramid.levels.empty()) throw Error("malformed pyramid: no levels");
    const FilterBank& fb = filters(pyramid.wavelet);

    Plane current = pyramid.approximation;
    std::vector<double> low, high, out;
    for (auto it = pyramid.levels.rbegin(); it != pyramid.levels.rend(); ++it) {
        const WaveletLevel& lvl = *it;
        const int hr = half_size(lvl.rows);
        const int hc = half_size(lvl.cols);
        auto shape_ok = [&](const Plane& p) { return p.rows == hr && p.cols == hc && p.size() == static_cast<std::size_t>(hr) * hc; };
        if (lvl.rows < 1 || lvl.cols < 1 || !shape_ok(current) || !shape_ok(lvl.hl) ||
            !shape_ok(lvl.lh) || !shape_ok(lvl.hh)) {
            throw Error("malformed pyramid: band shapes inconsistent with level size");
        }

        Plane xlow(lvl.rows, hc), xhigh(lvl.rows, hc);
        low.resize(static_cast<std::size_t>(hr));
        high.resize(static_cast<std::size_t>(hr));
        for (int c = 0; c < hc; ++c) {
            for (int r = 0; r < hr; ++r) {
                low[static_cast<std::size_t>(r)] = current(r, c);
                high[static_cast<std::size_t>(r)] = lvl.lh(r, c);
            }
            synthesize(low, high, fb, out, static_cast<std::size_t>(lvl.rows));
            for (int r = 0; r < lvl.rows; ++r) xlow(r, c) = out[static_cast<std::size_t>(r)];
            for (int r = 0; r < hr; ++r) {
                low[static_cast<std::size_t>(r)] = lvl.hl(r, c);
                high[static_cast<std::size_t>(r)] = lvl.hh(r, c);
            }
            synthesize(low, high, fb, out, static_cast<std::size_t>(lvl.rows));
            for (int r = 0; r < lvl.rows; ++r) xhigh(r, c) = out[static_cast<std::size_t>(r)];
        }

        Plane next(lvl.rows, lvl.cols);
        for (int r = 0; r < lvl.rows; ++r) {
            std::span<const double> lo(xlow.data.data() + static_cast<std::size_t>(r) * hc, static_cast<std::size_t>(hc));
            std::span<const double> hi(xhigh.data.data() + static_cast<std::size_t>(r) * hc, static_cast<std::size_t>(hc));
            synthesize(lo, hi, fb, out, static_cast<std::size_t>(lvl.cols));
            for (int c = 0; c < lvl.cols; ++c) next(r, c) = out[static_cast<std::size_t>(c)];
        }
        current = std::move(next);
    }
    return current;
}

namespace {

SubbandFeature band_feature(std::string name, const Plane& band, double k_sigma) {
    SubbandFeature f{std::move(name), 0.0, 0.0};
    if (band.size() == 0) return f;
    double sum = 0.0;
    for (double c : band.data) {
        f.energy += c * c;
        sum += c;
    }
    const auto n = static_cast<double>(band.size());
    const double mean = sum / n;
    double ss = 0.0;
    for (double c : band.data) ss += (c - mean) * (c - mean);
    const double sigma = std::sqrt(ss / n);
    if (sigma > 0.0) {
        std::size_t significant = 0;
        for (double c : band.data) {
            if (std::abs(c) > k_sigma * sigma) ++significant;
        }
        f.significant_fraction = static_cast<double>(significant) / n;
    }
    return f;
}

} // namespace

std::vector<SubbandFeature> wavelet_features(const WaveletPyramid& pyramid, double k_sigma) {
    if (!(k_sigma > 0.0)) throw Error("k_sigma must be > 0");
    std::vector<SubbandFeature> out;
    for (std::size_t l = 0; l < pyramid.levels.size(); ++l) {
        const std::string tag = "L" + std::to_string(l + 1) + ".";
        out.push_back(band_feature(tag + "HL", pyramid.levels[l].hl, k_sigma));
        out.push_back(band_feature(tag + "LH", pyramid.levels[l].lh, k_sigma));
        out.push_back(band_feature(tag + "HH", pyramid.levels[l].hh, k_sigma));
    }
    out.push_back(band_feature("LL", pyramid.approximation, k_sigma));
    return out;
}

Plane roi_patch(const GrayImage& img, const LungMask& mask, int levels) {
    if (img.width() != mask.width() || img.height() != mask.height()) {
        throw Error("mask dimension mismatch");
    }
    const BoundingBox box = bounding_box(mask);
    double sum = 0.0;
    std::size_t n = 0;
    for (int y = box.y0; y <= box.y1; ++y) {
        for (int x = box.x0; x <= box.x1; ++x) {
            if (mask.at(x, y)) {
                sum += img.at(x, y);
                ++n;
            }
        }
    }
    const double mean = sum / static_cast<double>(n);
    const int block = 1 << levels;
    auto round_up = [block](int v) { return std::max(block, (v + block - 1) / block * block); };

    Plane patch(round_up(box.height()), round_up(box.width()), mean);
    for (int y = box.y0; y <= box.y1; ++y) {
        for (int x = box.x0; x <= box.x1; ++x) {
            if (mask.at(x, y)) patch(y - box.y0, x - box.x0) = img.at(x, y);
        }
    }
    return patch;
}

FeatureVector wavelet_signature(const GrayImage& img, const LungMask& mask,
                                const WaveletConfig& cfg, std::string_view prefix) {
    cfg.validate();
    const auto pyramid = dwt2(roi_patch(img, mask, cfg.levels), cfg.wavelet, cfg.levels);
    FeatureVector out;
    const std::string base = std::string(prefix) + ".wavelet.";
    for (const auto& band : wavelet_features(pyramid, cfg.k_sigma)) {
        out.add(base + band.band + ".energy", band.energy);
        out.add(base + band.band + ".significant_fraction", band.significant_fraction);
    }
    return out;
}

} // namespace cxr
