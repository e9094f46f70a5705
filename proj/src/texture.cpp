#include "cxr/texture.hpp"

#include <cmath>
#include <numbers>

#include "cxr/error.hpp"

namespace cxr {

namespace {

// Multiples of 45 degrees step d pixels along each nonzero axis (45 degrees
// is (+d, -d)); any other angle rounds the Euclidean offset.
std::pair<int, int> displacement(int distance, double angle_degrees) {
    const double radians = angle_degrees * std::numbers::pi / 180.0;
    const double c = std::cos(radians);
    const double s = std::sin(radians);
    const double steps = angle_degrees / 45.0;
    if (std::abs(steps - std::round(steps)) < 1e-9) {
        return {distance * static_cast<int>(std::lround(c * std::numbers::sqrt2)),
                -distance * static_cast<int>(std::lround(s * std::numbers::sqrt2))};
    }
    return {static_cast<int>(std::lround(distance * c)), -static_cast<int>(std::lround(distance * s))};
}

} // namespace

int GlcmOffset::dx() const { return displacement(distance, angle_degrees).first; }

int GlcmOffset::dy() const { return displacement(distance, angle_degrees).second; }

const std::array<std::string_view, HaralickVector::kCount>& HaralickVector::names() {
    static const std::array<std::string_view, kCount> kNames{
        "contrast", "energy", "entropy", "variance", "homogeneity", "dissimilarity", "correlation"};
    return kNames;
}

std::array<double, HaralickVector::kCount> HaralickVector::values() const {
    return {contrast, energy, entropy, variance, homogeneity, dissimilarity, correlation};
}

void TextureConfig::validate() const {
    if (distances.empty() || angles.empty()) throw Error("GLCM distances and angles must be nonempty");
    for (int d : distances) {
        if (d < 1) throw Error("GLCM distance must be >= 1");
    }
    for (double a : angles) {
        if (!std::isfinite(a)) throw Error("GLCM angle must be finite");
    }
}

std::vector<std::uint64_t> glcm_counts(const QuantizedImage& qimg, const LungMask& mask,
                                       GlcmOffset offset, bool symmetric) {
    if (offset.distance < 1) throw Error("GLCM distance must be >= 1");
    if (qimg.width() != mask.width() || qimg.height() != mask.height()) {
        throw Error("mask dimension mismatch");
    }
    const int dx = offset.dx();
    const int dy = offset.dy();
    if (dx == 0 && dy == 0) throw Error("GLCM offset rounds to zero displacement");

    const auto levels = static_cast<std::size_t>(qimg.levels());
    std::vector<std::uint64_t> counts(levels * levels, 0);
    for (int y = 0; y < qimg.height(); ++y) {
        for (int x = 0; x < qimg.width(); ++x) {
            if (!mask.at(x, y) || !mask.contains(x + dx, y + dy)) continue;
            const auto i = static_cast<std::size_t>(qimg.at(x, y));
            const auto j = static_cast<std::size_t>(qimg.at(x + dx, y + dy));
            ++counts[i * levels + j];
            if (symmetric) ++counts[j * levels + i];
        }
    }
    return counts;
}

Glcm normalize_counts(const std::vector<std::uint64_t>& counts, int levels) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw SegmentationError("no valid pixel pairs for this offset (ROI too thin)");
    Glcm g{levels, std::vector<double>(counts.size())};
    const auto denom = static_cast<double>(total);
    for (std::size_t k = 0; k < counts.size(); ++k) g.p[k] = static_cast<double>(counts[k]) / denom;
    return g;
}

Glcm glcm(const QuantizedImage& qimg, const LungMask& mask, GlcmOffset offset, bool symmetric) {
    return normalize_counts(glcm_counts(qimg, mask, offset, symmetric), qimg.levels());
}

HaralickVector haralick_features(const Glcm& g) {
    // Long double accumulators: at L = 100 there are 10^4 terms and double
    // sums drift by ~1e-12.
    using acc = long double;
    const int L = g.levels;
    std::vector<acc> px(static_cast<std::size_t>(L), 0.0L);
    std::vector<acc> py(static_cast<std::size_t>(L), 0.0L);
    for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
            px[static_cast<std::size_t>(i)] += g.at(i, j);
            py[static_cast<std::size_t>(j)] += g.at(i, j);
        }
    }
    acc mu_x = 0.0L;
    acc mu_y = 0.0L;
    for (int i = 0; i < L; ++i) {
        mu_x += i * px[static_cast<std::size_t>(i)];
        mu_y += i * py[static_cast<std::size_t>(i)];
    }
    acc var_x = 0.0L;
    acc var_y = 0.0L;
    for (int i = 0; i < L; ++i) {
        var_x += (i - mu_x) * (i - mu_x) * px[static_cast<std::size_t>(i)];
        var_y += (i - mu_y) * (i - mu_y) * py[static_cast<std::size_t>(i)];
    }

    acc contrast = 0, energy = 0, entropy = 0, variance = 0, homogeneity = 0, dissimilarity = 0, covariance = 0;
    for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
            const acc p = g.at(i, j);
            if (p == 0.0L) continue;
            const acc diff = i - j;
            contrast += diff * diff * p;
            energy += p * p;
            entropy -= p * std::log2(p);
            variance += (i - mu_x) * (i - mu_x) * p;
            homogeneity += p / (1.0L + diff * diff);
            dissimilarity += std::abs(diff) * p;
            covariance += (i - mu_x) * (j - mu_y) * p;
        }
    }
    HaralickVector h;
    h.contrast = static_cast<double>(contrast);
    h.energy = static_cast<double>(energy);
    h.entropy = static_cast<double>(entropy);
    h.variance = static_cast<double>(variance);
    h.homogeneity = static_cast<double>(homogeneity);
    h.dissimilarity = static_cast<double>(dissimilarity);
    const acc sigma_product = std::sqrt(var_x) * std::sqrt(var_y);
    h.correlation = sigma_product > 0.0L ? static_cast<double>(covariance / sigma_product) : 0.0;
    return h;
}

FeatureVector haralick_signature(const QuantizedImage& qimg, const LungMask& mask,
                                 const TextureConfig& cfg, std::string_view prefix) {
    cfg.validate();
    FeatureVector out;
    for (int d : cfg.distances) {
        std::array<double, HaralickVector::kCount> sums{};
        for (double angle : cfg.angles) {
            const auto values = haralick_features(glcm(qimg, mask, GlcmOffset{d, angle}, cfg.symmetric)).values();
            for (std::size_t k = 0; k < values.size(); ++k) sums[k] += values[k];
        }
        const auto n_angles = static_cast<double>(cfg.angles.size());
        for (std::size_t k = 0; k < sums.size(); ++k) {
            out.add(std::string(prefix) + ".d" + std::to_string(d) + "." + std::string(HaralickVector::names()[k]),
                    sums[k] / n_angles);
        }
    }
    return out;
}

FeatureVector texture_signature(const QuantizedImage& qimg, const LungMask& mask,
                                const TextureConfig& cfg) {
    FeatureVector out;
    for (const auto& side : split_lungs(mask)) {
        out.append(haralick_signature(qimg, side.mask, cfg, to_string(side.side)));
    }
    return out;
}

} // namespace cxr
