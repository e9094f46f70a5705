#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cxr/imaging.hpp"
#include "cxr/learn/tree.hpp"
#include "cxr/texture.hpp"
#include "cxr/wavelets.hpp"

namespace cxr::pipeline {

enum class RoiMode { split, whole };

/// Every tunable of a run. Serialized as `key = value` lines with `#`
/// comments; to_text() writes a file documenting each key.
struct PipelineConfig {
    int levels = 100;
    HefParams hef;
    TextureConfig texture;
    RoiMode roi_mode = RoiMode::split;
    WaveletConfig wavelet;
    bool segmentation_fallback = true;

    int pca_components = 3;
    int xmeans_k_min = 1;
    int xmeans_k_max = 10;
    std::vector<learn::Criterion> criteria{learn::Criterion::entropy, learn::Criterion::gini};
    std::vector<int> depths = default_depths();
    int min_samples_leaf = 1;
    int cv_folds = 3;
    double alpha = 0.05;

    std::uint64_t seed = 42;
    int threads = 1; // 0 = one per hardware thread

    /// Throws cxr::Error naming the first offending key.
    void validate() const;

    std::string to_text() const;

    /// The keys that change extracted features, in to_text() form. A model
    /// stores this so classification reproduces its training features.
    std::string extraction_text() const;

    std::vector<std::string> sides() const;
    /// Features per image: sides x (distances x 7 + 2 x (3 x wavelet levels + 1)).
    int feature_width() const;

    static std::vector<int> default_depths();
};

PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

std::string_view to_string(RoiMode mode);

} // namespace cxr::pipeline
