#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cxr::pipeline {

struct ManifestRow {
    std::string id;
    std::filesystem::path image; // absolute
    std::string label;           // empty when unlabeled
    std::optional<std::filesystem::path> mask;
    bool fallback = false; // no usable mask file; segment automatically
};

struct Manifest {
    std::vector<ManifestRow> rows;

    std::size_t size() const { return rows.size(); }
    /// Sorted distinct nonempty labels.
    std::vector<std::string> labels() const;
};

/// Reads a CSV with header `id,image,label,mask`. Relative paths resolve
/// against the manifest's directory. A blank or missing mask file sets the
/// fallback flag. Image files are not opened here; extraction reports
/// unreadable images per row. Throws cxr::Error on duplicate ids, a bad
/// header, or a label outside `allowed_labels` (when nonempty).
Manifest ingest(const std::filesystem::path& path, const std::vector<std::string>& allowed_labels = {});

/// Writes the manifest with paths relative to `path`'s directory when they
/// lie beneath it.
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Default label set of the synthetic generator.
const std::vector<std::string>& default_labels();

struct SynthSpec {
    int per_class = 100;
    int width = 128;
    int height = 128;
    std::uint64_t seed = 42;
    /// Ratio of the first class's count to the last class's; counts fall
    /// geometrically in between. 1 gives balanced classes.
    double imbalance = 1.0;
};

/// Writes images/<id>.pgm, masks/<id>.pgm and manifest.csv under `out_dir`.
/// Two elliptical lung lobes sit on a brighter body. Lobe texture per class:
///   normal  low-noise, no grating
///   type1   grating varying along x, period ~4 px
///   type2   grating varying along y, period ~8 px
///   type3   diagonal (45 deg) grating, period ~6 px
/// with seeded jitter of period, phase, orientation, amplitude, lobe size
/// and position. Output bytes depend only on the spec.
Manifest make_synthetic_dataset(const SynthSpec& spec, const std::filesystem::path& out_dir);

} // namespace cxr::pipeline
