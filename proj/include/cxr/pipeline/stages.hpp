#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cxr/learn/cluster.hpp"
#include "cxr/learn/table.hpp"
#include "cxr/pipeline/config.hpp"
#include "cxr/pipeline/dataset.hpp"
#include "cxr/pipeline/model.hpp"
#include "cxr/stats.hpp"

namespace cxr::pipeline {

/// Per-stage seed streams derived from the master seed.
enum class SeedStream : std::uint64_t { synth = 1, cluster = 2, cv = 3, stats = 4 };
std::uint64_t stage_seed(const PipelineConfig& cfg, SeedStream stream);

struct ClusterReport {
    learn::ClusterModel model;
    std::vector<int> sizes;
    std::vector<std::string> ids;
    std::vector<std::string> labels; // empty when unlabeled
    Eigen::MatrixXd scatter;         // N x 2, first two principal components
};

/// X-means (seeded by the cluster stream) on the first `pca.components`
/// principal components of the centered features, plus the first two
/// components for plotting. Throws "too few samples" for fewer than 2 rows.
ClusterReport run_cluster(const learn::FeatureTable& table, const PipelineConfig& cfg);
void write_cluster_report(const ClusterReport& report, const std::filesystem::path& json_path,
                          const std::filesystem::path& scatter_csv);

/// Grid search over cfg.criteria x cfg.depths with stratified cv_folds-fold
/// cross validation (seeded by the cv stream), refit on all rows.
TrainedModel run_train(const learn::FeatureTable& table, const PipelineConfig& cfg);
/// Table 4 style text: best criterion, best depth, "m ± s", fold scores.
std::string cv_report_text(const learn::CvReport& report);
nlohmann::json cv_report_json(const learn::CvReport& report);

struct FeatureStats {
    std::string feature;
    std::optional<stats::ShapiroResult> shapiro;
    std::optional<stats::AnovaResult> anova;
    std::vector<stats::TukeyRow> tukey;
    std::string note; // why a test was skipped
};

struct StatsReport {
    double alpha = 0.05;
    std::vector<std::string> groups;
    std::vector<FeatureStats> features;
};

/// Per feature: Shapiro-Wilk on the pooled column, one-way ANOVA across
/// label groups (sorted by name) and Tukey-Kramer pairs. Features where a
/// test's preconditions fail carry a note instead of that result.
StatsReport run_stats(const learn::FeatureTable& table, const PipelineConfig& cfg);
/// Columns: feature, pair, mean_difference, significance.
void write_tukey_csv(const std::filesystem::path& path, const StatsReport& report);
/// Columns: feature, shapiro_w, shapiro_p, anova_f, anova_p, note.
void write_stats_summary_csv(const std::filesystem::path& path, const StatsReport& report);

struct RunArtifacts {
    std::filesystem::path dir;
    std::map<std::string, std::string> files; // relative path -> SHA-256
    std::string content_hash;                 // SHA-256 over the sorted file list
    std::size_t rows = 0;
    std::size_t errors = 0;
    learn::CvReport cv;
};

/// extract -> cluster -> train -> stats, writing into `out_dir`:
/// config.txt, features.csv, errors.csv, cluster.json, scatter.csv,
/// model.json, cv_report.json, cv_report.txt, stats_summary.csv, tukey.csv
/// and artifacts.json listing every file's hash.
RunArtifacts run_all(const Manifest& manifest, const PipelineConfig& cfg, const std::filesystem::path& out_dir);

} // namespace cxr::pipeline
