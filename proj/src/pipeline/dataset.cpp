#include "cxr/pipeline/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>

#include "cxr/error.hpp"
#include "cxr/imaging.hpp"
#include "cxr/pipeline/csv.hpp"
#include "cxr/random.hpp"

namespace cxr::pipeline {

namespace fs = std::filesystem;

std::vector<std::string> Manifest::labels() const {
    std::set<std::string> seen;
    for (const auto& r : rows) {
        if (!r.label.empty()) seen.insert(r.label);
    }
    return {seen.begin(), seen.end()};
}

Manifest ingest(const fs::path& path, const std::vector<std::string>& allowed_labels) {
    if (!fs::is_regular_file(path)) throw Error("cannot read manifest: " + path.string());
    const auto records = read_csv(path);
    if (records.empty()) throw Error("manifest is empty: " + path.string());
    const CsvRow expected{"id", "image", "label", "mask"};
    if (records.front() != expected) throw Error("manifest header must be id,image,label,mask");

    const fs::path base = fs::absolute(path).parent_path();
    auto resolve = [&](const std::string& p) { return (fs::path(p).is_absolute() ? fs::path(p) : base / p).lexically_normal(); };
    const std::set<std::string> allowed(allowed_labels.begin(), allowed_labels.end());

    Manifest m;
    std::set<std::string> ids;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& rec = records[i];
        const std::string where = "manifest line " + std::to_string(i + 1);
        if (rec.size() != 4) throw Error(where + ": expected 4 fields, got " + std::to_string(rec.size()));
        ManifestRow row;
        row.id = rec[0];
        if (row.id.empty()) throw Error(where + ": empty id");
        if (!ids.insert(row.id).second) throw Error("duplicate sample id: " + row.id);
        if (rec[1].empty()) throw Error(where + ": empty image path");
        row.image = resolve(rec[1]);
        row.label = rec[2];
        if (!allowed.empty() && !row.label.empty() && !allowed.count(row.label)) {
            throw Error(where + ": unknown label " + row.label);
        }
        if (!rec[3].empty() && fs::is_regular_file(resolve(rec[3]))) {
            row.mask = resolve(rec[3]);
        } else {
            row.fallback = true;
        }
        m.rows.push_back(std::move(row));
    }
    return m;
}

void write_manifest(const fs::path& path, const Manifest& manifest) {
    const fs::path base = fs::absolute(path).parent_path();
    auto rel = [&](const fs::path& p) {
        const fs::path r = p.lexically_relative(base);
        const bool inside = !r.empty() && *r.begin() != "..";
        return (inside ? r : p).generic_string();
    };
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << csv_line({"id", "image", "label", "mask"});
    for (const auto& r : manifest.rows) {
        out << csv_line({r.id, rel(r.image), r.label, r.mask ? rel(*r.mask) : std::string()});
    }
}

const std::vector<std::string>& default_labels() {
    static const std::vector<std::string> labels{"normal", "type1", "type2", "type3"};
    return labels;
}

namespace {

struct Lobe {
    double cx, cy, ax, ay;
    bool contains(double x, double y) const {
        const double u = (x - cx) / ax, v = (y - cy) / ay;
        return u * u + v * v <= 1.0;
    }
};

struct Grating {
    double amplitude = 0.0;
    double period = 1.0;
    double angle = 0.0; // direction of variation, radians, screen y down
    double phase = 0.0;
    double noise = 0.0;
};

Grating class_grating(std::size_t cls, Rng& rng) {
    Grating g;
    auto jitter = [&](double v, double rel) { return v * (1.0 + rel * (2.0 * rng.uniform() - 1.0)); };
    const double deg = std::numbers::pi / 180.0;
    switch (cls) {
    case 0:
        g.noise = 0.025;
        break;
    case 1:
        g = {jitter(0.14, 0.2), jitter(4.0, 0.08), 5.0 * deg * (2.0 * rng.uniform() - 1.0), 0.0, 0.05};
        break;
    case 2:
        g = {jitter(0.14, 0.2), jitter(8.0, 0.1), 90.0 * deg + 5.0 * deg * (2.0 * rng.uniform() - 1.0), 0.0, 0.05};
        break;
    default:
        g = {jitter(0.14, 0.2), jitter(6.0, 0.1), 45.0 * deg + 5.0 * deg * (2.0 * rng.uniform() - 1.0), 0.0, 0.05};
        break;
    }
    g.phase = 2.0 * std::numbers::pi * rng.uniform();
    return g;
}

std::vector<int> class_counts(const SynthSpec& spec, std::size_t classes) {
    std::vector<int> counts;
    for (std::size_t c = 0; c < classes; ++c) {
        const double t = classes > 1 ? static_cast<double>(c) / static_cast<double>(classes - 1) : 0.0;
        counts.push_back(std::max(1, static_cast<int>(std::lround(spec.per_class * std::pow(spec.imbalance, -t)))));
    }
    return counts;
}

} // namespace

Manifest make_synthetic_dataset(const SynthSpec& spec, const fs::path& out_dir) {
    if (spec.per_class < 1) throw Error("synth: per_class must be >= 1");
    if (spec.width < 32 || spec.height < 32) throw Error("synth: images must be at least 32x32");
    if (!(spec.imbalance >= 1.0)) throw Error("synth: imbalance must be >= 1");

    fs::create_directories(out_dir / "images");
    fs::create_directories(out_dir / "masks");
    const auto& labels = default_labels();
    const auto counts = class_counts(spec, labels.size());
    const double w = spec.width, h = spec.height;

    Manifest manifest;
    std::uint64_t index = 0;
    for (std::size_t cls = 0; cls < labels.size(); ++cls) {
        for (int n = 0; n < counts[cls]; ++n) {
            Rng rng(derive_seed(spec.seed, index++));
            const Grating g = class_grating(cls, rng);
            auto jitter = [&](double v, double amount) { return v + amount * (2.0 * rng.uniform() - 1.0); };
            const double ax = jitter(0.16 * w, 0.02 * w), ay = jitter(0.34 * h, 0.03 * h);
            const double cy = jitter(0.5 * h, 0.03 * h);
            const Lobe lobes[2] = {{jitter(0.30 * w, 0.02 * w), cy, ax, ay}, {jitter(0.70 * w, 0.02 * w), cy, ax, ay}};
            const double base = jitter(0.32, 0.04);
            const double kx = std::cos(g.angle) * 2.0 * std::numbers::pi / g.period;
            const double ky = std::sin(g.angle) * 2.0 * std::numbers::pi / g.period;

            std::vector<double> px(static_cast<std::size_t>(spec.width * spec.height));
            std::vector<double> mask(px.size(), 0.0);
            for (int y = 0; y < spec.height; ++y) {
                for (int x = 0; x < spec.width; ++x) {
                    const auto i = static_cast<std::size_t>(y * spec.width + x);
                    const bool inside = lobes[0].contains(x, y) || lobes[1].contains(x, y);
                    double v;
                    if (inside) {
                        v = base + g.amplitude * std::sin(kx * x + ky * y + g.phase) + g.noise * rng.normal();
                        mask[i] = 1.0;
                    } else {
                        const double r = std::hypot((x - w / 2) / w, (y - h / 2) / h);
                        v = 0.78 - 0.15 * r + 0.02 * rng.normal();
                    }
                    px[i] = std::clamp(v, 0.0, 1.0);
                }
            }

            char id[64];
            std::snprintf(id, sizeof id, "%s_%04d", labels[cls].c_str(), n);
            ManifestRow row;
            row.id = id;
            row.label = labels[cls];
            row.image = (fs::absolute(out_dir) / "images" / (row.id + ".pgm")).lexically_normal();
            row.mask = (fs::absolute(out_dir) / "masks" / (row.id + ".pgm")).lexically_normal();
            save_pgm(row.image, GrayImage(spec.width, spec.height, std::move(px)));
            save_pgm(*row.mask, GrayImage(spec.width, spec.height, std::move(mask)));
            manifest.rows.push_back(std::move(row));
        }
    }
    write_manifest(out_dir / "manifest.csv", manifest);
    return manifest;
}

} // namespace cxr::pipeline
