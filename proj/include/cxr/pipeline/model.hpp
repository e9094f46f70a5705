#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cxr/imaging.hpp"
#include "cxr/learn/validation.hpp"
#include "cxr/pipeline/config.hpp"
#include "cxr/segmentation.hpp"

namespace cxr::pipeline {

inline constexpr const char* kModelFormatVersion = "1";

/// A classifier plus the configuration its training features came from.
struct TrainedModel {
    learn::ClassifierModel classifier;
    PipelineConfig config;
    learn::CvReport report;
};

nlohmann::json model_to_json(const TrainedModel& model);
/// Throws cxr::Error ("model parse: ...") on malformed documents and on a
/// format_version other than kModelFormatVersion.
TrainedModel model_from_json(const nlohmann::json& doc);

/// Pretty-printed JSON, byte-identical for identical models.
std::string model_text(const TrainedModel& model);
void save_model(const std::filesystem::path& path, const TrainedModel& model);

struct LoadedModel {
    TrainedModel model;
    std::string hash; // SHA-256 of the model file bytes, hex
};

LoadedModel load_model(const std::filesystem::path& path);
LoadedModel load_model_bytes(std::span<const std::uint8_t> bytes);

/// Throws cxr::Error naming the first extraction key whose value differs
/// between the model's training config and `cfg`.
void check_config_matches(const TrainedModel& model, const PipelineConfig& cfg);

struct Classification {
    std::string label;
    std::vector<std::pair<std::string, double>> scores; // class order
    std::string model_hash;
};

Classification classify(const LoadedModel& model, const GrayImage& image, const std::optional<LungMask>& mask);

/// Decodes PNG/PGM bytes (and an optional mask) and classifies. Shared by the
/// CLI and the HTTP service so both produce identical output.
Classification classify_bytes(const LoadedModel& model, std::span<const std::uint8_t> image,
                              std::optional<std::span<const std::uint8_t>> mask);

/// {"label": ..., "scores": {class: p, ...}, "model_hash": ...} on one line.
std::string classification_json(const Classification& c);

} // namespace cxr::pipeline
