#include "cxr/pipeline/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "cxr/error.hpp"

namespace cxr::pipeline {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int to_int(const std::string& key, const std::string& value) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) throw Error("config " + key + ": not an integer: " + value);
    return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) throw Error("config " + key + ": not an unsigned integer: " + value);
    return v;
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used == value.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error("config " + key + ": not a number: " + value);
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw Error("config " + key + ": not a boolean: " + value);
}

// Accepts "1,2,4" and ranges such as "1..20".
std::vector<int> to_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    for (const auto& item : split_list(value)) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(to_int(key, item));
            continue;
        }
        const int lo = to_int(key, trim(item.substr(0, dots)));
        const int hi = to_int(key, trim(item.substr(dots + 2)));
        if (hi < lo) throw Error("config " + key + ": empty range " + item);
        for (int v = lo; v <= hi; ++v) out.push_back(v);
    }
    if (out.empty()) throw Error("config " + key + ": empty list");
    return out;
}

std::vector<double> to_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& item : split_list(value)) out.push_back(to_double(key, item));
    if (out.empty()) throw Error("config " + key + ": empty list");
    return out;
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

template <class T, class F>
std::string join(const std::vector<T>& items, F&& format) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ",";
        out += format(items[i]);
    }
    return out;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

} // namespace

std::string_view to_string(RoiMode mode) { return mode == RoiMode::split ? "split" : "whole"; }

std::vector<int> PipelineConfig::default_depths() {
    std::vector<int> d;
    for (int i = 1; i <= 20; ++i) d.push_back(i);
    return d;
}

std::vector<std::string> PipelineConfig::sides() const {
    if (roi_mode == RoiMode::whole) return {"whole"};
    return {"left", "right"};
}

int PipelineConfig::feature_width() const {
    const int per_side = static_cast<int>(texture.distances.size()) * 7 + 2 * (3 * wavelet.levels + 1);
    return static_cast<int>(sides().size()) * per_side;
}

void PipelineConfig::validate() const {
    if (levels < 2 || levels > 4096) throw Error("config levels must be in [2, 4096]");
    hef.validate();
    texture.validate();
    wavelet.validate();
    if (pca_components < 0) throw Error("config pca.components must be >= 0");
    if (xmeans_k_min < 1 || xmeans_k_max < xmeans_k_min) throw Error("config xmeans needs 1 <= k_min <= k_max");
    if (criteria.empty()) throw Error("config tree.criteria must be nonempty");
    if (depths.empty()) throw Error("config tree.depths must be nonempty");
    for (int d : depths) {
        if (d < 1) throw Error("config tree.depths must be >= 1");
    }
    if (min_samples_leaf < 1) throw Error("config tree.min_samples_leaf must be >= 1");
    if (cv_folds < 2) throw Error("config cv.folds must be >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("config stats.alpha must be in (0, 1)");
    if (threads < 0) throw Error("config threads must be >= 0");
}

std::string PipelineConfig::extraction_text() const {
    std::ostringstream out;
    out << "levels = " << levels << "\n"
        << "hef.a = " << fmt(hef.a) << "\n"
        << "hef.b = " << fmt(hef.b) << "\n"
        << "hef.d0 = " << fmt(hef.d0) << "\n"
        << "hef.equalize = " << fmt_bool(hef.equalize) << "\n"
        << "glcm.distances = " << join(texture.distances, [](int v) { return std::to_string(v); }) << "\n"
        << "glcm.angles = " << join(texture.angles, [](double v) { return fmt(v); }) << "\n"
        << "glcm.symmetric = " << fmt_bool(texture.symmetric) << "\n"
        << "roi.mode = " << to_string(roi_mode) << "\n"
        << "wavelet.name = " << to_string(wavelet.wavelet) << "\n"
        << "wavelet.levels = " << wavelet.levels << "\n"
        << "wavelet.k_sigma = " << fmt(wavelet.k_sigma) << "\n"
        << "segmentation.fallback = " << fmt_bool(segmentation_fallback) << "\n";
    return out.str();
}

std::string PipelineConfig::to_text() const {
    std::ostringstream out;
    out << "# cxr pipeline configuration. One `key = value` per line; `#` starts a comment.\n"
        << "# Lists are comma separated; integer lists also accept ranges such as 1..20.\n\n"
        << "# Gray levels used to quantize the enhanced image before GLCM analysis.\n"
        << "levels = " << levels << "\n\n"
        << "# High-frequency emphasis filter H(D) = a + b * (1 - exp(-D^2 / (2 d0^2))),\n"
        << "# D in cycles per pixel. equalize applies histogram equalization afterwards.\n"
        << "hef.a = " << fmt(hef.a) << "\n"
        << "hef.b = " << fmt(hef.b) << "\n"
        << "hef.d0 = " << fmt(hef.d0) << "\n"
        << "hef.equalize = " << fmt_bool(hef.equalize) << "\n\n"
        << "# Co-occurrence offsets (pixels, degrees counter-clockwise from +x) and symmetry.\n"
        << "glcm.distances = " << join(texture.distances, [](int v) { return std::to_string(v); }) << "\n"
        << "glcm.angles = " << join(texture.angles, [](double v) { return fmt(v); }) << "\n"
        << "glcm.symmetric = " << fmt_bool(texture.symmetric) << "\n\n"
        << "# split: features per lung (left, right); whole: one ROI for the full mask.\n"
        << "roi.mode = " << to_string(roi_mode) << "\n\n"
        << "# Wavelet sub-band features: haar or db4, decomposition levels, and the\n"
        << "# k in the |c| > k * sigma significance rule.\n"
        << "wavelet.name = " << to_string(wavelet.wavelet) << "\n"
        << "wavelet.levels = " << wavelet.levels << "\n"
        << "wavelet.k_sigma = " << fmt(wavelet.k_sigma) << "\n\n"
        << "# Segment with Otsu thresholding when a manifest row has no mask.\n"
        << "segmentation.fallback = " << fmt_bool(segmentation_fallback) << "\n\n"
        << "# Principal components kept before clustering and before the tree\n"
        << "# (0 disables PCA).\n"
        << "pca.components = " << pca_components << "\n\n"
        << "# Cluster-count search range for X-means.\n"
        << "xmeans.k_min = " << xmeans_k_min << "\n"
        << "xmeans.k_max = " << xmeans_k_max << "\n\n"
        << "# Decision-tree grid searched with stratified cross validation.\n"
        << "tree.criteria = " << join(criteria, [](learn::Criterion c) { return std::string(learn::to_string(c)); }) << "\n"
        << "tree.depths = " << join(depths, [](int v) { return std::to_string(v); }) << "\n"
        << "tree.min_samples_leaf = " << min_samples_leaf << "\n"
        << "cv.folds = " << cv_folds << "\n\n"
        << "# Family-wise error rate for the Tukey-Kramer comparisons.\n"
        << "stats.alpha = " << fmt(alpha) << "\n\n"
        << "# Master seed; every stage derives its own stream from it.\n"
        << "seed = " << seed << "\n\n"
        << "# Extraction worker threads (0 = one per hardware thread). Output order\n"
        << "# and values do not depend on it.\n"
        << "threads = " << threads << "\n";
    return out.str();
}

PipelineConfig parse_config(std::string_view text) {
    PipelineConfig cfg;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> setters{
        {"levels", [&](auto& k, auto& v) { cfg.levels = to_int(k, v); }},
        {"hef.a", [&](auto& k, auto& v) { cfg.hef.a = to_double(k, v); }},
        {"hef.b", [&](auto& k, auto& v) { cfg.hef.b = to_double(k, v); }},
        {"hef.d0", [&](auto& k, auto& v) { cfg.hef.d0 = to_double(k, v); }},
        {"hef.equalize", [&](auto& k, auto& v) { cfg.hef.equalize = to_bool(k, v); }},
        {"glcm.distances", [&](auto& k, auto& v) { cfg.texture.distances = to_int_list(k, v); }},
        {"glcm.angles", [&](auto& k, auto& v) { cfg.texture.angles = to_double_list(k, v); }},
        {"glcm.symmetric", [&](auto& k, auto& v) { cfg.texture.symmetric = to_bool(k, v); }},
        {"roi.mode",
         [&](auto& k, auto& v) {
             if (v == "split") cfg.roi_mode = RoiMode::split;
             else if (v == "whole") cfg.roi_mode = RoiMode::whole;
             else throw Error("config " + k + ": expected split or whole, got " + v);
         }},
        {"wavelet.name", [&](auto&, auto& v) { cfg.wavelet.wavelet = wavelet_from_string(v); }},
        {"wavelet.levels", [&](auto& k, auto& v) { cfg.wavelet.levels = to_int(k, v); }},
        {"wavelet.k_sigma", [&](auto& k, auto& v) { cfg.wavelet.k_sigma = to_double(k, v); }},
        {"segmentation.fallback", [&](auto& k, auto& v) { cfg.segmentation_fallback = to_bool(k, v); }},
        {"pca.components", [&](auto& k, auto& v) { cfg.pca_components = to_int(k, v); }},
        {"xmeans.k_min", [&](auto& k, auto& v) { cfg.xmeans_k_min = to_int(k, v); }},
        {"xmeans.k_max", [&](auto& k, auto& v) { cfg.xmeans_k_max = to_int(k, v); }},
        {"tree.criteria",
         [&](auto& k, auto& v) {
             cfg.criteria.clear();
             for (const auto& item : split_list(v)) cfg.criteria.push_back(learn::criterion_from_string(item));
             if (cfg.criteria.empty()) throw Error("config " + k + ": empty list");
         }},
        {"tree.depths", [&](auto& k, auto& v) { cfg.depths = to_int_list(k, v); }},
        {"tree.min_samples_leaf", [&](auto& k, auto& v) { cfg.min_samples_leaf = to_int(k, v); }},
        {"cv.folds", [&](auto& k, auto& v) { cfg.cv_folds = to_int(k, v); }},
        {"stats.alpha", [&](auto& k, auto& v) { cfg.alpha = to_double(k, v); }},
        {"seed", [&](auto& k, auto& v) { cfg.seed = to_u64(k, v); }},
        {"threads", [&](auto& k, auto& v) { cfg.threads = to_int(k, v); }},
    };

    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) throw Error("config line " + std::to_string(line_no) + ": unknown key " + key);
        it->second(key, value);
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read config: " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

} // namespace cxr::pipeline
