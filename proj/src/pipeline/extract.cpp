#include "cxr/pipeline/extract.hpp"

#include <atomic>
#include <charconv>
#include <fstream>
#include <thread>

#include "cxr/error.hpp"
#include "cxr/pipeline/csv.hpp"
#include "cxr/texture.hpp"
#include "cxr/wavelets.hpp"

namespace cxr::pipeline {

namespace fs = std::filesystem;

namespace {

struct SideRoi {
    std::string name;
    LungMask mask;
};

std::vector<SideRoi> side_rois(const LungMask& mask, const PipelineConfig& cfg) {
    if (cfg.roi_mode == RoiMode::whole) {
        if (mask.count() == 0) throw SegmentationError("empty mask");
        return {{"whole", mask}};
    }
    auto parts = split_lungs(mask);
    if (parts.size() == 1) return {{"left", parts[0].mask}, {"right", parts[0].mask}};
    std::vector<SideRoi> out;
    for (auto& p : parts) out.push_back({std::string(to_string(p.side)), std::move(p.mask)});
    return out;
}

} // namespace

FeatureVector extract_image(const GrayImage& image, const std::optional<LungMask>& mask, const PipelineConfig& cfg) {
    LungMask lungs;
    if (mask) {
        if (mask->width() != image.width() || mask->height() != image.height()) {
            throw Error("mask dimension mismatch");
        }
        lungs = *mask;
    } else if (cfg.segmentation_fallback) {
        lungs = otsu_lung_mask(image);
    } else {
        throw SegmentationError("no mask given and segmentation.fallback is off");
    }

    const GrayImage enhanced = hef_filter(image, cfg.hef);
    const QuantizedImage q = quantize(enhanced, cfg.levels);

    FeatureVector out;
    for (const auto& side : side_rois(lungs, cfg)) {
        out.append(haralick_signature(q, side.mask, cfg.texture, side.name));
        out.append(wavelet_signature(enhanced, side.mask, cfg.wavelet, side.name));
    }
    return out;
}

std::vector<std::string> feature_names(const PipelineConfig& cfg) {
    std::vector<std::string> names;
    for (const auto& side : cfg.sides()) {
        for (int d : cfg.texture.distances) {
            for (const auto& f : HaralickVector::names()) names.push_back(side + ".d" + std::to_string(d) + "." + std::string(f));
        }
        std::vector<std::string> bands;
        for (int l = 1; l <= cfg.wavelet.levels; ++l) {
            for (const char* b : {"HL", "LH", "HH"}) bands.push_back("L" + std::to_string(l) + "." + b);
        }
        bands.push_back("LL");
        for (const auto& b : bands) {
            names.push_back(side + ".wavelet." + b + ".energy");
            names.push_back(side + ".wavelet." + b + ".significant_fraction");
        }
    }
    return names;
}

Extraction extract_features(const Manifest& manifest, const PipelineConfig& cfg) {
    cfg.validate();
    const std::size_t n = manifest.size();
    std::vector<std::optional<FeatureVector>> rows(n);
    std::vector<std::string> failures(n);

    auto work = [&](std::size_t i) {
        const auto& row = manifest.rows[i];
        try {
            const GrayImage img = load_image(row.image);
            std::optional<LungMask> mask;
            if (row.mask) mask = load_mask(*row.mask, img.width(), img.height());
            rows[i] = extract_image(img, mask, cfg);
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    };

    unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) work(i);
            });
        }
        for (auto& t : pool) t.join();
    }

    Extraction out;
    out.table.columns = feature_names(cfg);
    std::vector<std::size_t> ok;
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i]) {
            if (rows[i]->names != out.table.columns) throw std::logic_error("feature names out of sync with config");
            ok.push_back(i);
        } else {
            out.errors.push_back({manifest.rows[i].id, failures[i]});
        }
    }
    out.table.values.resize(static_cast<Eigen::Index>(ok.size()), static_cast<Eigen::Index>(out.table.columns.size()));
    bool labeled = false;
    for (std::size_t r = 0; r < ok.size(); ++r) {
        const auto& src = manifest.rows[ok[r]];
        out.table.ids.push_back(src.id);
        out.table.labels.push_back(src.label);
        labeled = labeled || !src.label.empty();
        for (std::size_t c = 0; c < rows[ok[r]]->values.size(); ++c) {
            out.table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[ok[r]]->values[c];
        }
    }
    if (!labeled) out.table.labels.clear();
    return out;
}

void write_feature_csv(const fs::path& path, const learn::FeatureTable& table) {
    table.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    CsvRow header{"id", "label"};
    header.insert(header.end(), table.columns.begin(), table.columns.end());
    out << csv_line(header);
    for (Eigen::Index r = 0; r < table.rows(); ++r) {
        CsvRow row;
        row.push_back(table.ids.empty() ? std::to_string(r) : table.ids[static_cast<std::size_t>(r)]);
        row.push_back(table.labeled() ? table.labels[static_cast<std::size_t>(r)] : std::string());
        for (Eigen::Index c = 0; c < table.cols(); ++c) row.push_back(format_double(table.values(r, c)));
        out << csv_line(row);
    }
}

learn::FeatureTable read_feature_csv(const fs::path& path) {
    const auto records = read_csv(path);
    if (records.empty()) throw Error("feature CSV is empty: " + path.string());
    const auto& header = records.front();
    if (header.size() < 3 || header[0] != "id" || header[1] != "label") {
        throw Error("feature CSV header must start with id,label and name at least one feature");
    }
    learn::FeatureTable t;
    t.columns.assign(header.begin() + 2, header.end());
    t.values.resize(static_cast<Eigen::Index>(records.size() - 1), static_cast<Eigen::Index>(t.columns.size()));
    bool labeled = false;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (rec.size() != header.size()) {
            throw Error("feature CSV line " + std::to_string(i + 1) + ": expected " + std::to_string(header.size()) + " fields");
        }
        t.ids.push_back(rec[0]);
        t.labels.push_back(rec[1]);
        labeled = labeled || !rec[1].empty();
        for (std::size_t c = 2; c < rec.size(); ++c) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(rec[c].data(), rec[c].data() + rec[c].size(), v);
            if (ec != std::errc() || ptr != rec[c].data() + rec[c].size()) {
                throw Error("feature CSV line " + std::to_string(i + 1) + ": bad number '" + rec[c] + "'");
            }
            t.values(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(c - 2)) = v;
        }
    }
    if (!labeled) t.labels.clear();
    t.validate();
    return t;
}

void write_errors_csv(const fs::path& path, const std::vector<RowError>& errors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << csv_line({"id", "error"});
    for (const auto& e : errors) out << csv_line({e.id, e.message});
}

} // namespace cxr::pipeline
