#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cxr/features.hpp"
#include "cxr/imaging.hpp"
#include "cxr/segmentation.hpp"

namespace cxr {

/// Pixel offset for co-occurrence counting. Screen coordinates: y grows
/// downward, so 45 degrees is (+d, -d) and 90 degrees is (0, -d).
struct GlcmOffset {
    int distance = 1;
    double angle_degrees = 0.0;

    int dx() const;
    int dy() const;
};

/// L x L co-occurrence probabilities, row-major p[i * L + j].
struct Glcm {
    int levels = 0;
    std::vector<double> p;

    double at(int i, int j) const { return p[static_cast<std::size_t>(i) * levels + j]; }
};

struct HaralickVector {
    double contrast = 0.0;
    double energy = 0.0;
    double entropy = 0.0;
    double variance = 0.0;
    double homogeneity = 0.0;
    double dissimilarity = 0.0;
    double correlation = 0.0;

    static constexpr std::size_t kCount = 7;
    static const std::array<std::string_view, kCount>& names();
    std::array<double, kCount> values() const;
};

struct TextureConfig {
    std::vector<int> distances{1, 2, 4};
    std::vector<double> angles{0.0, 45.0, 90.0, 135.0};
    bool symmetric = true;

    void validate() const;
};

/// Raw pair counts over pixels where both endpoints lie inside the mask. In
/// symmetric mode every pair is counted in both orders.
std::vector<std::uint64_t> glcm_counts(const QuantizedImage& qimg, const LungMask& mask,
                                       GlcmOffset offset, bool symmetric);

/// Normalized co-occurrence matrix. Throws if the mask has no valid pair at
/// this offset.
Glcm glcm(const QuantizedImage& qimg, const LungMask& mask, GlcmOffset offset, bool symmetric);

Glcm normalize_counts(const std::vector<std::uint64_t>& counts, int levels);

/// Entropy in bits; correlation is 0 when either marginal has zero variance.
HaralickVector haralick_features(const Glcm& g);

/// Haralick features for one mask, averaged over angles, one block per
/// distance. Names are `<prefix>.d<distance>.<feature>`.
FeatureVector haralick_signature(const QuantizedImage& qimg, const LungMask& mask,
                                 const TextureConfig& cfg, std::string_view prefix);

/// Splits the mask into lung sides and concatenates haralick_signature for
/// each side (prefix = side name).
FeatureVector texture_signature(const QuantizedImage& qimg, const LungMask& mask,
                                const TextureConfig& cfg);

} // namespace cxr
