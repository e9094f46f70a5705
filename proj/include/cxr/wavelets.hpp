#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cxr/features.hpp"
#include "cxr/imaging.hpp"
#include "cxr/plane.hpp"
#include "cxr/segmentation.hpp"

namespace cxr {

enum class Wavelet { haar, db4 };

std::string_view to_string(Wavelet w);
Wavelet wavelet_from_string(std::string_view name);

/// Detail bands of one decomposition level plus the size of that level's
/// input. Band naming: first letter = filter along x, second = along y.
struct WaveletLevel {
    int rows = 0;
    int cols = 0;
    Plane hl; // horizontal high, vertical low
    Plane lh; // horizontal low, vertical high
    Plane hh;
};

struct WaveletPyramid {
    Wavelet wavelet = Wavelet::haar;
    std::vector<WaveletLevel> levels; // finest first
    Plane approximation;              // LL of the coarsest level
};

struct SubbandFeature {
    std::string band; // "L1.HL", ..., "LL"
    double energy = 0.0;
    double significant_fraction = 0.0;
};

struct WaveletConfig {
    Wavelet wavelet = Wavelet::haar;
    int levels = 3;
    double k_sigma = 3.0;

    void validate() const;
};

/// Separable orthonormal analysis, rows then columns, repeated on the LL band.
/// Each 1-D pass uses periodic extension; odd lengths are zero-padded by one
/// sample, so a band has ceil(n / 2) coefficients and the transform stays an
/// isometry (exact reconstruction and energy conservation at every size).
WaveletPyramid dwt2(const Plane& img, Wavelet wavelet, int levels);

/// Synthesis inverse of dwt2. Throws on inconsistent band shapes.
Plane idwt2(const WaveletPyramid& pyramid);

/// Per band, detail bands finest-first then LL: energy = sum c^2 and the
/// share of |c| > k_sigma * sigma, sigma the band's population std (0 when
/// sigma is 0).
std::vector<SubbandFeature> wavelet_features(const WaveletPyramid& pyramid, double k_sigma);

/// Bounding-box patch of the masked region. Pixels outside the mask take the
/// ROI mean, and the patch is padded with the mean up to a multiple of
/// 2^levels on each axis.
Plane roi_patch(const GrayImage& img, const LungMask& mask, int levels);

/// Wavelet features of one mask's ROI patch, named
/// `<prefix>.wavelet.<band>.energy` / `.significant_fraction`.
FeatureVector wavelet_signature(const GrayImage& img, const LungMask& mask,
                                const WaveletConfig& cfg, std::string_view prefix);

} // namespace cxr
