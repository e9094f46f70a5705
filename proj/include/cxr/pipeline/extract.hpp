#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cxr/features.hpp"
#include "cxr/imaging.hpp"
#include "cxr/learn/table.hpp"
#include "cxr/pipeline/config.hpp"
#include "cxr/pipeline/dataset.hpp"
#include "cxr/segmentation.hpp"

namespace cxr::pipeline {

/// One image to feature row: HEF enhancement, quantization, lung mask (the
/// given one or the Otsu fallback), side split, then per side the Haralick
/// signature followed by the wavelet signature. A single-component mask in
/// split mode feeds the whole ROI to both the left and right slots so the
/// row width stays fixed. Throws SegmentationError when no usable ROI exists.
FeatureVector extract_image(const GrayImage& image, const std::optional<LungMask>& mask, const PipelineConfig& cfg);

/// Feature names extract_image produces for this config, in order.
std::vector<std::string> feature_names(const PipelineConfig& cfg);

struct RowError {
    std::string id;
    std::string message;
};

struct Extraction {
    learn::FeatureTable table;
    std::vector<RowError> errors;
};

/// Extracts every manifest row (cfg.threads workers). Rows that fail are
/// reported in `errors` and left out of the table; order follows the manifest.
Extraction extract_features(const Manifest& manifest, const PipelineConfig& cfg);

/// Header `id,label,<feature names>`; values in shortest round-trip form.
void write_feature_csv(const std::filesystem::path& path, const learn::FeatureTable& table);
learn::FeatureTable read_feature_csv(const std::filesystem::path& path);

void write_errors_csv(const std::filesystem::path& path, const std::vector<RowError>& errors);

} // namespace cxr::pipeline
