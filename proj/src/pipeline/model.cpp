#include "cxr/pipeline/model.hpp"

#include <fstream>
#include <sstream>

#include "cxr/error.hpp"
#include "cxr/pipeline/extract.hpp"
#include "cxr/pipeline/hash.hpp"

namespace cxr::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// `key = value` lines of a config text, comments dropped.
std::vector<std::pair<std::string, std::string>> config_entries(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
            return s;
        };
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

json row_json(const Eigen::RowVectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(row_json(m.row(r)));
    return rows;
}

Eigen::RowVectorXd row_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    Eigen::RowVectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

Eigen::MatrixXd matrix_from(const json& j, Eigen::Index cols) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(j.size()), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        const Eigen::RowVectorXd row = row_from(j[r]);
        if (row.size() != cols) throw Error("model parse: ragged matrix");
        out.row(static_cast<Eigen::Index>(r)) = row;
    }
    return out;
}

} // namespace

json model_to_json(const TrainedModel& model) {
    const auto& c = model.classifier;
    json doc;
    doc["format_version"] = kModelFormatVersion;
    doc["classes"] = c.classes;
    doc["feature_names"] = c.feature_names;

    json config = json::object();
    for (const auto& [k, v] : config_entries(model.config.to_text())) config[k] = v;
    doc["config"] = config;

    doc["scaler"] = {{"mean", row_json(c.scaler.mean)}, {"scale", row_json(c.scaler.scale)}};
    if (c.pca) {
        doc["pca"] = {{"mean", row_json(c.pca->mean)},
                      {"components", matrix_json(c.pca->components)},
                      {"explained_variance", row_json(c.pca->explained_variance.transpose())}};
    } else {
        doc["pca"] = nullptr;
    }

    json nodes = json::array();
    for (const auto& n : c.tree.nodes()) {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"depth", n.depth},
                         {"counts", n.counts}});
    }
    const auto& p = c.tree.params();
    doc["tree"] = {{"criterion", learn::to_string(p.criterion)},
                   {"max_depth", p.max_depth},
                   {"min_samples_leaf", p.min_samples_leaf},
                   {"n_features", c.tree.n_features()},
                   {"n_classes", c.tree.n_classes()},
                   {"nodes", nodes}};

    const auto& r = model.report;
    doc["cv"] = {{"folds", r.cv_folds},
                 {"seed", r.seed},
                 {"best_criterion", learn::to_string(r.best_criterion)},
                 {"best_depth", r.best_depth},
                 {"fold_scores", r.fold_scores},
                 {"mean", r.summary.mean},
                 {"std", r.summary.std},
                 {"min", r.summary.min},
                 {"max", r.summary.max},
                 {"summary", r.summary.mean_pm_std()}};
    return doc;
}

TrainedModel model_from_json(const json& doc) {
    try {
        if (!doc.is_object() || !doc.contains("format_version")) throw Error("model parse: missing format_version");
        const auto version = doc.at("format_version").get<std::string>();
        if (version != kModelFormatVersion) {
            throw Error("model format version mismatch: file has " + version + ", expected " + kModelFormatVersion);
        }
        TrainedModel m;
        std::string config_text;
        for (const auto& [k, v] : doc.at("config").items()) config_text += k + " = " + v.get<std::string>() + "\n";
        m.config = parse_config(config_text);

        auto& c = m.classifier;
        c.classes = doc.at("classes").get<std::vector<std::string>>();
        c.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        const auto width = static_cast<Eigen::Index>(c.feature_names.size());
        c.scaler.mean = row_from(doc.at("scaler").at("mean"));
        c.scaler.scale = row_from(doc.at("scaler").at("scale"));
        if (c.scaler.mean.size() != width || c.scaler.scale.size() != width) throw Error("model parse: scaler width");

        const auto& pca = doc.at("pca");
        if (!pca.is_null()) {
            learn::PcaModel pm;
            pm.mean = row_from(pca.at("mean"));
            pm.components = matrix_from(pca.at("components"), width);
            pm.explained_variance = row_from(pca.at("explained_variance")).transpose();
            if (pm.mean.size() != width || pm.explained_variance.size() != pm.components.rows()) {
                throw Error("model parse: PCA shape");
            }
            c.pca = std::move(pm);
        }

        const auto& t = doc.at("tree");
        learn::TreeParams params;
        params.criterion = learn::criterion_from_string(t.at("criterion").get<std::string>());
        params.max_depth = t.at("max_depth").get<int>();
        params.min_samples_leaf = t.at("min_samples_leaf").get<int>();
        std::vector<learn::TreeNode> nodes;
        for (const auto& n : t.at("nodes")) {
            learn::TreeNode node;
            node.feature = n.at("feature").get<int>();
            node.threshold = n.at("threshold").get<double>();
            node.left = n.at("left").get<int>();
            node.right = n.at("right").get<int>();
            node.depth = n.at("depth").get<int>();
            node.counts = n.at("counts").get<std::vector<double>>();
            nodes.push_back(std::move(node));
        }
        const int n_features = t.at("n_features").get<int>();
        const int expected_features = c.pca ? c.pca->n_components() : static_cast<int>(width);
        if (n_features != expected_features) throw Error("model parse: tree width does not match preprocessing");
        c.tree = learn::TreeModel(std::move(nodes), n_features, t.at("n_classes").get<int>(), params);
        if (c.tree.n_classes() != static_cast<int>(c.classes.size())) throw Error("model parse: class count mismatch");

        const auto& cv = doc.at("cv");
        auto& r = m.report;
        r.cv_folds = cv.at("folds").get<int>();
        r.seed = cv.at("seed").get<std::uint64_t>();
        r.best_criterion = learn::criterion_from_string(cv.at("best_criterion").get<std::string>());
        r.best_depth = cv.at("best_depth").get<int>();
        r.fold_scores = cv.at("fold_scores").get<std::vector<double>>();
        r.summary = {cv.at("mean").get<double>(), cv.at("std").get<double>(), cv.at("min").get<double>(),
                     cv.at("max").get<double>()};
        return m;
    } catch (const json::exception& e) {
        throw Error(std::string("model parse: ") + e.what());
    } catch (const Error& e) {
        const std::string what = e.what();
        if (what.rfind("model", 0) == 0) throw;
        throw Error("model parse: " + what);
    }
}

std::string model_text(const TrainedModel& model) { return model_to_json(model).dump(2) + "\n"; }

void save_model(const fs::path& path, const TrainedModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << model_text(model);
}

LoadedModel load_model_bytes(std::span<const std::uint8_t> bytes) {
    json doc;
    try {
        doc = json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        throw Error(std::string("model parse: ") + e.what());
    }
    return LoadedModel{model_from_json(doc), sha256_hex(bytes)};
}

LoadedModel load_model(const fs::path& path) {
    if (!fs::is_regular_file(path)) throw Error("cannot read model: " + path.string());
    return load_model_bytes(read_file_bytes(path));
}

void check_config_matches(const TrainedModel& model, const PipelineConfig& cfg) {
    const auto want = config_entries(model.config.extraction_text());
    const auto got = config_entries(cfg.extraction_text());
    for (std::size_t i = 0; i < want.size(); ++i) {
        if (want[i] != got[i]) {
            throw Error("config mismatch: " + want[i].first + " is " + got[i].second + " but the model was trained with " +
                        want[i].second);
        }
    }
}

Classification classify(const LoadedModel& loaded, const GrayImage& image, const std::optional<LungMask>& mask) {
    const auto& c = loaded.model.classifier;
    const FeatureVector f = extract_image(image, mask, loaded.model.config);
    if (f.names != c.feature_names) throw Error("model feature names do not match extraction output");
    Eigen::MatrixXd row(1, static_cast<Eigen::Index>(f.size()));
    for (std::size_t i = 0; i < f.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = f.values[i];

    const Eigen::MatrixXd proba = c.predict_proba(row);
    Classification out;
    out.label = c.classes[static_cast<std::size_t>(c.predict(row).front())];
    for (std::size_t k = 0; k < c.classes.size(); ++k) out.scores.emplace_back(c.classes[k], proba(0, static_cast<Eigen::Index>(k)));
    out.model_hash = loaded.hash;
    return out;
}

Classification classify_bytes(const LoadedModel& model, std::span<const std::uint8_t> image,
                              std::optional<std::span<const std::uint8_t>> mask) {
    const GrayImage img = decode_image(image);
    std::optional<LungMask> m;
    if (mask) m = mask_from_image(decode_image(*mask), img.width(), img.height());
    return classify(model, img, m);
}

std::string classification_json(const Classification& c) {
    json scores = json::object();
    for (const auto& [name, p] : c.scores) scores[name] = p;
    json doc = {{"label", c.label}, {"scores", scores}, {"model_hash", c.model_hash}};
    return doc.dump();
}

} // namespace cxr::pipeline
