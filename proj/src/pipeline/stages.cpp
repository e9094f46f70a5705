#include "cxr/pipeline/stages.hpp"

#include <fstream>
#include <map>

#include "cxr/error.hpp"
#include "cxr/learn/pca.hpp"
#include "cxr/pipeline/csv.hpp"
#include "cxr/pipeline/extract.hpp"
#include "cxr/pipeline/hash.hpp"
#include "cxr/random.hpp"

namespace cxr::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

void write_text(const fs::path& path, const std::string& text) { open_out(path) << text; }

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace

std::uint64_t stage_seed(const PipelineConfig& cfg, SeedStream stream) {
    return derive_seed(cfg.seed, static_cast<std::uint64_t>(stream));
}

ClusterReport run_cluster(const learn::FeatureTable& table, const PipelineConfig& cfg) {
    table.validate();
    if (table.rows() < 2) throw Error("too few samples for clustering: need at least 2 rows");
    const Eigen::MatrixXd& z = table.values;
    const int k_max = std::min<int>(cfg.xmeans_k_max, static_cast<int>(table.rows()));
    const int k_min = std::min(cfg.xmeans_k_min, k_max);

    // X-means runs on the retained principal components of the centered
    // features (the raw columns when pca.components = 0); the scatter is the
    // first two. No standardization: it shrinks separated directions against
    // pure-noise columns and X-means then under-splits.
    const int max_comps = static_cast<int>(std::min(table.rows() - 1, table.cols()));
    const int retained = std::min(cfg.pca_components, max_comps);
    const int plotted = std::min(2, max_comps);
    const Eigen::MatrixXd projected = learn::pca_transform(learn::pca_fit(z, std::max(retained, plotted)), z);

    ClusterReport r;
    r.model = learn::xmeans(retained > 0 ? Eigen::MatrixXd(projected.leftCols(retained)) : z, k_min, k_max,
                            stage_seed(cfg, SeedStream::cluster));
    r.sizes.assign(static_cast<std::size_t>(r.model.k), 0);
    for (int a : r.model.assignments) ++r.sizes[static_cast<std::size_t>(a)];
    r.ids = table.ids;
    r.labels = table.labels;
    r.scatter = Eigen::MatrixXd::Zero(table.rows(), 2);
    r.scatter.leftCols(plotted) = projected.leftCols(plotted);
    return r;
}

void write_cluster_report(const ClusterReport& r, const fs::path& json_path, const fs::path& scatter_csv) {
    json trials = json::array();
    for (const auto& t : r.model.split_trials) {
        trials.push_back({{"k_before", t.k_before},
                          {"cluster", t.cluster},
                          {"parent_bic", t.parent_bic},
                          {"children_bic", t.children_bic},
                          {"accepted", t.accepted}});
    }
    json trace = json::array();
    for (const auto& p : r.model.bic_trace) trace.push_back({{"k", p.k}, {"bic", p.bic}});
    const json doc = {{"k", r.model.k}, {"sizes", r.sizes}, {"seed", r.model.seed}, {"bic_trace", trace}, {"split_trials", trials}};
    write_text(json_path, doc.dump(2) + "\n");

    auto out = open_out(scatter_csv);
    out << csv_line({"id", "label", "cluster", "pc1", "pc2"});
    for (Eigen::Index i = 0; i < r.scatter.rows(); ++i) {
        const auto u = static_cast<std::size_t>(i);
        out << csv_line({r.ids.empty() ? std::to_string(i) : r.ids[u], r.labels.empty() ? std::string() : r.labels[u],
                         std::to_string(r.model.assignments[u]), format_double(r.scatter(i, 0)),
                         format_double(r.scatter(i, 1))});
    }
}

TrainedModel run_train(const learn::FeatureTable& table, const PipelineConfig& cfg) {
    table.validate();
    if (!table.labeled()) throw Error("training needs a labeled feature table");
    for (const auto& l : table.labels) {
        if (l.empty()) throw Error("training rows must all be labeled");
    }
    const learn::LabelEncoding enc = learn::encode_labels(table.labels);
    if (enc.classes.size() < 2) throw Error("training needs at least 2 classes");

    learn::GridSpec spec;
    spec.depths = cfg.depths;
    spec.criteria = cfg.criteria;
    spec.cv_folds = cfg.cv_folds;
    spec.seed = stage_seed(cfg, SeedStream::cv);
    const int max_pca = static_cast<int>(std::min<Eigen::Index>(table.cols(), table.rows() - table.rows() / cfg.cv_folds - 1));
    spec.pca_components = std::min(cfg.pca_components, std::max(0, max_pca));
    spec.min_samples_leaf = cfg.min_samples_leaf;

    learn::GridSearchResult g = learn::grid_search(table.values, enc.ids, enc.classes, spec);
    g.model.feature_names = table.columns;
    return TrainedModel{std::move(g.model), cfg, std::move(g.report)};
}

std::string cv_report_text(const learn::CvReport& r) {
    std::string out;
    out += "Best criterion: " + std::string(learn::to_string(r.best_criterion)) + "\n";
    out += "Best maximum tree depth: " + std::to_string(r.best_depth) + "\n";
    out += "Stratified folds: " + std::to_string(r.cv_folds) + "\n";
    out += "Accuracy: " + r.summary.mean_pm_std() + "\n";
    out += "Minimum fold score: " + fixed(r.summary.min, 2) + "\n";
    out += "Maximum fold score: " + fixed(r.summary.max, 2) + "\n";
    out += "Fold scores:";
    for (double s : r.fold_scores) out += " " + fixed(s, 4);
    out += "\n";
    return out;
}

json cv_report_json(const learn::CvReport& r) {
    json cells = json::array();
    for (const auto& c : r.cells) {
        cells.push_back({{"criterion", learn::to_string(c.criterion)},
                         {"max_depth", c.max_depth},
                         {"fold_scores", c.fold_scores},
                         {"mean", c.summary.mean},
                         {"std", c.summary.std},
                         {"min", c.summary.min},
                         {"max", c.summary.max}});
    }
    return {{"best_criterion", learn::to_string(r.best_criterion)},
            {"best_depth", r.best_depth},
            {"folds", r.cv_folds},
            {"seed", r.seed},
            {"fold_scores", r.fold_scores},
            {"mean", r.summary.mean},
            {"std", r.summary.std},
            {"min", r.summary.min},
            {"max", r.summary.max},
            {"summary", r.summary.mean_pm_std()},
            {"cells", cells}};
}

StatsReport run_stats(const learn::FeatureTable& table, const PipelineConfig& cfg) {
    table.validate();
    if (!table.labeled()) throw Error("statistics need a labeled feature table");
    const learn::LabelEncoding enc = learn::encode_labels(table.labels);

    StatsReport report;
    report.alpha = cfg.alpha;
    report.groups = enc.classes;
    const std::uint64_t seed = stage_seed(cfg, SeedStream::stats);
    for (Eigen::Index c = 0; c < table.cols(); ++c) {
        FeatureStats fs;
        fs.feature = table.columns[static_cast<std::size_t>(c)];
        std::vector<stats::Group> groups;
        for (const auto& name : enc.classes) groups.push_back({name, {}});
        std::vector<double> column;
        for (Eigen::Index r = 0; r < table.rows(); ++r) {
            column.push_back(table.values(r, c));
            groups[static_cast<std::size_t>(enc.ids[static_cast<std::size_t>(r)])].values.push_back(table.values(r, c));
        }
        std::vector<std::string> notes;
        try {
            fs.shapiro = stats::shapiro_wilk(column, seed);
        } catch (const Error& e) {
            notes.push_back(std::string("shapiro: ") + e.what());
        }
        try {
            fs.anova = stats::anova_oneway(groups);
            fs.tukey = stats::tukey_kramer(groups, cfg.alpha);
        } catch (const Error& e) {
            notes.push_back(std::string("anova: ") + e.what());
        }
        for (std::size_t i = 0; i < notes.size(); ++i) fs.note += (i ? "; " : "") + notes[i];
        report.features.push_back(std::move(fs));
    }
    return report;
}

void write_tukey_csv(const fs::path& path, const StatsReport& report) {
    auto out = open_out(path);
    out << csv_line({"feature", "pair", "mean_difference", "significance"});
    for (const auto& f : report.features) {
        for (const auto& row : f.tukey) {
            out << csv_line({f.feature, row.group_a + " vs " + row.group_b, format_double(row.mean_difference),
                             row.significant ? "Significant" : "Not significant"});
        }
    }
}

void write_stats_summary_csv(const fs::path& path, const StatsReport& report) {
    auto out = open_out(path);
    out << csv_line({"feature", "shapiro_w", "shapiro_p", "anova_f", "anova_p", "note"});
    for (const auto& f : report.features) {
        out << csv_line({f.feature, f.shapiro ? format_double(f.shapiro->w) : "", f.shapiro ? format_double(f.shapiro->p) : "",
                         f.anova ? format_double(f.anova->f) : "", f.anova ? format_double(f.anova->p) : "", f.note});
    }
}

RunArtifacts run_all(const Manifest& manifest, const PipelineConfig& cfg, const fs::path& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);
    RunArtifacts a;
    a.dir = out_dir;

    write_text(out_dir / "config.txt", cfg.to_text());
    const Extraction ex = extract_features(manifest, cfg);
    write_feature_csv(out_dir / "features.csv", ex.table);
    write_errors_csv(out_dir / "errors.csv", ex.errors);
    a.rows = static_cast<std::size_t>(ex.table.rows());
    a.errors = ex.errors.size();

    const ClusterReport cluster = run_cluster(ex.table, cfg);
    write_cluster_report(cluster, out_dir / "cluster.json", out_dir / "scatter.csv");

    const TrainedModel model = run_train(ex.table, cfg);
    save_model(out_dir / "model.json", model);
    write_text(out_dir / "cv_report.json", cv_report_json(model.report).dump(2) + "\n");
    write_text(out_dir / "cv_report.txt", cv_report_text(model.report));
    a.cv = model.report;

    const StatsReport st = run_stats(ex.table, cfg);
    write_stats_summary_csv(out_dir / "stats_summary.csv", st);
    write_tukey_csv(out_dir / "tukey.csv", st);

    std::string listing;
    for (const char* name : {"config.txt", "features.csv", "errors.csv", "cluster.json", "scatter.csv", "model.json",
                             "cv_report.json", "cv_report.txt", "stats_summary.csv", "tukey.csv"}) {
        a.files[name] = sha256_file(out_dir / name);
    }
    for (const auto& [name, hash] : a.files) listing += hash + "  " + name + "\n";
    a.content_hash = sha256_hex(listing);
    const json doc = {{"files", a.files}, {"content_hash", a.content_hash}};
    write_text(out_dir / "artifacts.json", doc.dump(2) + "\n");
    return a;
}

} // namespace cxr::pipeline
