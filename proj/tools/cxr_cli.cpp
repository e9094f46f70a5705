#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "cxr/error.hpp"
#include "cxr/pipeline/config.hpp"
#include "cxr/pipeline/dataset.hpp"
#include "cxr/pipeline/extract.hpp"
#include "cxr/pipeline/model.hpp"
#include "cxr/pipeline/service.hpp"
#include "cxr/pipeline/stages.hpp"

namespace fs = std::filesystem;
using namespace cxr;
using namespace cxr::pipeline;

namespace {

enum Exit { ok = 0, usage = 1, data = 2, internal = 3 };

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool out_required) {
    cmd->add_option("--config", c.config, "Key-value config file (see `cxr config`)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "Master seed, overrides the config");
    auto* out = cmd->add_option("--out", c.out, "Output path");
    if (out_required) out->required();
}

PipelineConfig config_of(const Common& c) {
    PipelineConfig cfg = c.config.empty() ? PipelineConfig{} : load_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    cfg.validate();
    return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Texture analysis of chest radiographs: feature extraction, clustering, classification"};
    app.require_subcommand(1);

    Common common;

    auto* config_cmd = app.add_subcommand("config", "Print or write the default configuration file");
    add_common(config_cmd, common, false);

    SynthSpec synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic texture dataset with manifest");
    add_common(synth_cmd, common, true);
    synth_cmd->add_option("--per-class", synth.per_class, "Images per class")->capture_default_str();
    int size = 128;
    synth_cmd->add_option("--size", size, "Image width and height")->capture_default_str();
    synth_cmd->add_option("--imbalance", synth.imbalance, "First-to-last class count ratio")->capture_default_str();

    std::string manifest_path;
    std::string labels_csv;
    auto* ingest_cmd = app.add_subcommand("ingest", "Validate a manifest and summarize it");
    add_common(ingest_cmd, common, false);
    ingest_cmd->add_option("manifest", manifest_path, "Manifest CSV (id,image,label,mask)")->required();
    ingest_cmd->add_option("--labels", labels_csv, "Comma-separated allowed labels");

    std::string errors_path;
    auto* extract_cmd = app.add_subcommand("extract", "Extract texture features into a CSV");
    add_common(extract_cmd, common, true);
    extract_cmd->add_option("manifest", manifest_path, "Manifest CSV")->required();
    extract_cmd->add_option("--errors", errors_path, "Per-row error CSV (default: <out>.errors.csv)");

    std::string features_path;
    auto* cluster_cmd = app.add_subcommand("cluster", "X-means clustering with a 2-D PCA scatter");
    add_common(cluster_cmd, common, true);
    cluster_cmd->add_option("features", features_path, "Feature CSV")->required();

    auto* train_cmd = app.add_subcommand("train", "Grid-searched decision tree with stratified CV");
    add_common(train_cmd, common, true);
    train_cmd->add_option("features", features_path, "Labeled feature CSV")->required();

    auto* stats_cmd = app.add_subcommand("stats", "Shapiro-Wilk, ANOVA and Tukey-Kramer per feature");
    add_common(stats_cmd, common, true);
    stats_cmd->add_option("features", features_path, "Labeled feature CSV")->required();

    std::string model_path, image_path, mask_path;
    auto* classify_cmd = app.add_subcommand("classify", "Classify one image; prints JSON");
    add_common(classify_cmd, common, false);
    classify_cmd->add_option("--model", model_path, "Model JSON")->required();
    classify_cmd->add_option("--image", image_path, "PNG or PGM image")->required();
    classify_cmd->add_option("--mask", mask_path, "Lung mask image (nonzero = lung)");

    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve_cmd = app.add_subcommand("serve", "HTTP classification service");
    add_common(serve_cmd, common, false);
    serve_cmd->add_option("--model", model_path, "Model JSON")->required();
    serve_cmd->add_option("--host", host, "Bind address")->capture_default_str();
    serve_cmd->add_option("--port", port, "Port (0 = any free port)")->capture_default_str();

    auto* run_cmd = app.add_subcommand("run", "extract, cluster, train and stats in one go, with artifact hashes");
    add_common(run_cmd, common, true);
    run_cmd->add_option("manifest", manifest_path, "Manifest CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? Exit::ok : Exit::usage;
    }

    try {
        const PipelineConfig cfg = config_of(common);

        if (*config_cmd) {
            if (common.out.empty()) std::cout << cfg.to_text();
            else write_file(common.out, cfg.to_text());
        } else if (*synth_cmd) {
            synth.width = synth.height = size;
            synth.seed = stage_seed(cfg, SeedStream::synth);
            const Manifest m = make_synthetic_dataset(synth, common.out);
            std::cout << "wrote " << m.size() << " images and " << (fs::path(common.out) / "manifest.csv").string() << "\n";
        } else if (*ingest_cmd) {
            std::vector<std::string> allowed;
            std::stringstream ss(labels_csv);
            for (std::string item; std::getline(ss, item, ',');) {
                if (!item.empty()) allowed.push_back(item);
            }
            const Manifest m = ingest(manifest_path, allowed);
            std::size_t fallback = 0;
            for (const auto& r : m.rows) fallback += r.fallback ? 1 : 0;
            std::cout << "rows: " << m.size() << "\nlabels:";
            for (const auto& l : m.labels()) std::cout << " " << l;
            std::cout << "\nrows without mask (fallback segmentation): " << fallback << "\n";
            if (!common.out.empty()) write_manifest(common.out, m);
        } else if (*extract_cmd) {
            const Extraction ex = extract_features(ingest(manifest_path), cfg);
            write_feature_csv(common.out, ex.table);
            write_errors_csv(errors_path.empty() ? common.out + ".errors.csv" : errors_path, ex.errors);
            for (const auto& e : ex.errors) std::cerr << "row " << e.id << ": " << e.message << "\n";
            std::cout << "extracted " << ex.table.rows() << " rows x " << ex.table.cols() << " features, "
                      << ex.errors.size() << " errors\n";
        } else if (*cluster_cmd) {
            const ClusterReport r = run_cluster(read_feature_csv(features_path), cfg);
            fs::create_directories(common.out);
            write_cluster_report(r, fs::path(common.out) / "cluster.json", fs::path(common.out) / "scatter.csv");
            std::cout << "k = " << r.model.k << "\n";
        } else if (*train_cmd) {
            const TrainedModel m = run_train(read_feature_csv(features_path), cfg);
            fs::create_directories(common.out);
            save_model(fs::path(common.out) / "model.json", m);
            write_file(fs::path(common.out) / "cv_report.json", cv_report_json(m.report).dump(2) + "\n");
            write_file(fs::path(common.out) / "cv_report.txt", cv_report_text(m.report));
            std::cout << cv_report_text(m.report);
        } else if (*stats_cmd) {
            const StatsReport r = run_stats(read_feature_csv(features_path), cfg);
            fs::create_directories(common.out);
            write_stats_summary_csv(fs::path(common.out) / "stats_summary.csv", r);
            write_tukey_csv(fs::path(common.out) / "tukey.csv", r);
            std::cout << "tested " << r.features.size() << " features across " << r.groups.size() << " groups\n";
        } else if (*classify_cmd) {
            const LoadedModel model = load_model(model_path);
            if (!common.config.empty()) check_config_matches(model.model, cfg);
            std::optional<std::vector<std::uint8_t>> mask;
            if (!mask_path.empty()) mask = read_file_bytes(mask_path);
            std::optional<std::span<const std::uint8_t>> mask_span;
            if (mask) mask_span = std::span<const std::uint8_t>(*mask);
            std::cout << classification_json(classify_bytes(model, read_file_bytes(image_path), mask_span)) << "\n";
        } else if (*serve_cmd) {
            LoadedModel model = load_model(model_path);
            if (!common.config.empty()) check_config_matches(model.model, cfg);
            sigset_t signals;
            sigemptyset(&signals);
            sigaddset(&signals, SIGINT);
            sigaddset(&signals, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &signals, nullptr);

            ClassifyService service(std::move(model));
            const int bound = service.bind(host, port);
            std::thread waiter([&] {
                int sig = 0;
                sigwait(&signals, &sig);
                service.stop();
            });
            std::cerr << "listening on " << host << ":" << bound << std::endl;
            service.listen();
            if (waiter.joinable()) {
                pthread_kill(waiter.native_handle(), SIGTERM);
                waiter.join();
            }
        } else if (*run_cmd) {
            const RunArtifacts a = run_all(ingest(manifest_path), cfg, common.out);
            std::cout << "rows: " << a.rows << ", errors: " << a.errors << "\n"
                      << "accuracy: " << a.cv.summary.mean_pm_std() << "\n"
                      << "content hash: " << a.content_hash << "\n";
        }
        return Exit::ok;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Exit::data;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return Exit::internal;
    }
}
