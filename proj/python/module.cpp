#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

#include "cxr/error.hpp"
#include "cxr/imaging.hpp"
#include "cxr/pipeline/config.hpp"
#include "cxr/pipeline/dataset.hpp"
#include "cxr/pipeline/extract.hpp"
#include "cxr/pipeline/hash.hpp"
#include "cxr/pipeline/model.hpp"
#include "cxr/pipeline/stages.hpp"
#include "cxr/segmentation.hpp"
#include "cxr/texture.hpp"
#include "cxr/wavelets.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace cxr;
using namespace cxr::pipeline;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;
using BoolArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;

void require_2d(const py::array& a, const char* what) {
    if (a.ndim() != 2) throw Error(std::string(what) + " must be a 2-D array");
}

py::array_t<double> to_numpy(int rows, int cols, std::span<const double> values) {
    py::array_t<double> out({rows, cols});
    std::copy(values.begin(), values.end(), out.mutable_data());
    return out;
}

py::array_t<double> to_numpy(const GrayImage& img) { return to_numpy(img.height(), img.width(), img.pixels()); }
py::array_t<double> to_numpy(const Plane& p) { return to_numpy(p.rows, p.cols, p.data); }

GrayImage image_from(const DoubleArray& a) {
    require_2d(a, "image");
    const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
    return GrayImage(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

Plane plane_from(const DoubleArray& a) {
    require_2d(a, "band");
    Plane p(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), p.data.begin());
    return p;
}

LungMask mask_from(const BoolArray& a) {
    require_2d(a, "mask");
    std::vector<std::uint8_t> bits(a.data(), a.data() + a.size());
    return LungMask(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), std::move(bits));
}

QuantizedImage quantized_from(const IntArray& a, int levels) {
    require_2d(a, "bins");
    return QuantizedImage(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), levels,
                          std::vector<int>(a.data(), a.data() + a.size()));
}

py::dict features_dict(const FeatureVector& v) {
    py::dict d;
    for (std::size_t i = 0; i < v.size(); ++i) d[py::str(v.names[i])] = v.values[i];
    return d;
}

py::dict classification_dict(const Classification& c) {
    py::dict scores;
    for (const auto& [name, p] : c.scores) scores[py::str(name)] = p;
    py::dict d;
    d["label"] = c.label;
    d["scores"] = scores;
    d["model_hash"] = c.model_hash;
    return d;
}

PipelineConfig config_or_default(const std::optional<PipelineConfig>& cfg) {
    return cfg ? *cfg : PipelineConfig{};
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "C++ core of cxrtex";

    auto base = py::register_exception<Error>(m, "CxrError", PyExc_ValueError);
    py::register_exception<SegmentationError>(m, "SegmentationError", base.ptr());

    py::class_<PipelineConfig>(m, "Config", "Pipeline configuration; text form is `key = value` lines")
        .def(py::init<>())
        .def_static("parse", &parse_config, py::arg("text"))
        .def_static("load", &load_config, py::arg("path"))
        .def("to_text", &PipelineConfig::to_text)
        .def("validate", &PipelineConfig::validate)
        .def("feature_width", &PipelineConfig::feature_width)
        .def_readwrite("levels", &PipelineConfig::levels)
        .def_readwrite("seed", &PipelineConfig::seed)
        .def_readwrite("threads", &PipelineConfig::threads)
        .def_readwrite("depths", &PipelineConfig::depths)
        .def_readwrite("cv_folds", &PipelineConfig::cv_folds)
        .def("__repr__", [](const PipelineConfig& c) { return "<cxrtex.Config levels=" + std::to_string(c.levels) + ">"; });

    m.def("load_image", [](const fs::path& p) { return to_numpy(load_image(p)); }, py::arg("path"),
          "Load a PNG or PGM as a float64 array in [0, 1], shape (height, width).");

    m.def(
        "hef_filter",
        [](const DoubleArray& img, double a, double b, double d0, bool equalize) {
            HefParams params;
            params.a = a;
            params.b = b;
            params.d0 = d0;
            params.equalize = equalize;
            return to_numpy(hef_filter(image_from(img), params));
        },
        py::arg("image"), py::arg("a") = HefParams{}.a, py::arg("b") = HefParams{}.b, py::arg("d0") = HefParams{}.d0,
        py::arg("equalize") = HefParams{}.equalize);

    m.def(
        "quantize",
        [](const DoubleArray& img, int levels) {
            const QuantizedImage q = quantize(image_from(img), levels);
            py::array_t<int> out({q.height(), q.width()});
            std::copy(q.bins().begin(), q.bins().end(), out.mutable_data());
            return out;
        },
        py::arg("image"), py::arg("levels"));

    m.def(
        "glcm",
        [](const IntArray& bins, int levels, const BoolArray& mask, int distance, double angle, bool symmetric) {
            const Glcm g = glcm(quantized_from(bins, levels), mask_from(mask), GlcmOffset{distance, angle}, symmetric);
            return to_numpy(levels, levels, g.p);
        },
        py::arg("bins"), py::arg("levels"), py::arg("mask"), py::arg("distance") = 1, py::arg("angle") = 0.0,
        py::arg("symmetric") = true, "Normalized co-occurrence matrix P[i, j].");

    m.def(
        "haralick",
        [](const DoubleArray& p) {
            require_2d(p, "glcm");
            if (p.shape(0) != p.shape(1)) throw Error("glcm must be square");
            Glcm g;
            g.levels = static_cast<int>(p.shape(0));
            g.p.assign(p.data(), p.data() + p.size());
            const HaralickVector h = haralick_features(g);
            py::dict d;
            const auto values = h.values();
            for (std::size_t i = 0; i < HaralickVector::kCount; ++i) d[py::str(std::string(HaralickVector::names()[i]))] = values[i];
            return d;
        },
        py::arg("glcm"));

    m.def(
        "dwt2",
        [](const DoubleArray& img, const std::string& wavelet, int levels) {
            const WaveletPyramid pyr = dwt2(plane_from(img), wavelet_from_string(wavelet), levels);
            py::list out;
            for (const auto& level : pyr.levels) {
                py::dict d;
                d["HL"] = to_numpy(level.hl);
                d["LH"] = to_numpy(level.lh);
                d["HH"] = to_numpy(level.hh);
                d["shape"] = py::make_tuple(level.rows, level.cols);
                out.append(d);
            }
            return py::make_tuple(out, to_numpy(pyr.approximation));
        },
        py::arg("image"), py::arg("wavelet") = "haar", py::arg("levels") = 3,
        "Returns (details finest first, LL) where each detail is a dict of HL, LH, HH and the level input shape.");

    m.def(
        "idwt2",
        [](const py::list& details, const DoubleArray& ll, const std::string& wavelet) {
            WaveletPyramid pyr;
            pyr.wavelet = wavelet_from_string(wavelet);
            for (const auto& item : details) {
                const auto d = item.cast<py::dict>();
                WaveletLevel level;
                const auto shape = d["shape"].cast<std::pair<int, int>>();
                level.rows = shape.first;
                level.cols = shape.second;
                level.hl = plane_from(d["HL"].cast<DoubleArray>());
                level.lh = plane_from(d["LH"].cast<DoubleArray>());
                level.hh = plane_from(d["HH"].cast<DoubleArray>());
                pyr.levels.push_back(std::move(level));
            }
            pyr.approximation = plane_from(ll);
            return to_numpy(idwt2(pyr));
        },
        py::arg("details"), py::arg("ll"), py::arg("wavelet") = "haar");

    m.def(
        "extract_image",
        [](const DoubleArray& img, const std::optional<BoolArray>& mask, const std::optional<PipelineConfig>& cfg) {
            std::optional<LungMask> m;
            if (mask) m = mask_from(*mask);
            return features_dict(extract_image(image_from(img), m, config_or_default(cfg)));
        },
        py::arg("image"), py::arg("mask") = py::none(), py::arg("config") = py::none(),
        "Feature vector of one image as an ordered name -> value dict.");

    m.def(
        "extract_features",
        [](const fs::path& manifest, const fs::path& out, const std::optional<PipelineConfig>& cfg) {
            const Extraction ex = extract_features(ingest(manifest), config_or_default(cfg));
            write_feature_csv(out, ex.table);
            py::list errors;
            for (const auto& e : ex.errors) errors.append(py::make_tuple(e.id, e.message));
            return py::make_tuple(static_cast<int>(ex.table.rows()), errors);
        },
        py::arg("manifest"), py::arg("out"), py::arg("config") = py::none(),
        "Writes the feature CSV; returns (rows written, [(id, error)]).");

    m.def(
        "synth",
        [](const fs::path& out, int per_class, std::uint64_t seed, int size, double imbalance) {
            SynthSpec spec;
            spec.per_class = per_class;
            spec.seed = seed;
            spec.width = spec.height = size;
            spec.imbalance = imbalance;
            return static_cast<int>(make_synthetic_dataset(spec, out).size());
        },
        py::arg("out"), py::arg("per_class") = 100, py::arg("seed") = 42, py::arg("size") = 128,
        py::arg("imbalance") = 1.0, "Writes images, masks and manifest.csv; returns the image count.");

    m.def(
        "train",
        [](const fs::path& features, const fs::path& model_out, const std::optional<PipelineConfig>& cfg) {
            const TrainedModel model = run_train(read_feature_csv(features), config_or_default(cfg));
            save_model(model_out, model);
            return model.report.summary.mean_pm_std();
        },
        py::arg("features"), py::arg("model_out"), py::arg("config") = py::none(),
        "Grid search, then saves the best model; returns the CV accuracy as `mean ± std`.");

    m.def(
        "run",
        [](const fs::path& manifest, const fs::path& out, const std::optional<PipelineConfig>& cfg) {
            const RunArtifacts a = run_all(ingest(manifest), config_or_default(cfg), out);
            py::dict files;
            for (const auto& [name, hash] : a.files) files[py::str(name)] = hash;
            py::dict d;
            d["content_hash"] = a.content_hash;
            d["files"] = files;
            d["rows"] = a.rows;
            d["errors"] = a.errors;
            return d;
        },
        py::arg("manifest"), py::arg("out"), py::arg("config") = py::none(),
        "Full extract, cluster, train and stats run; returns artifact hashes.");

    m.def("sha256_file", &sha256_file, py::arg("path"));

    py::class_<LoadedModel>(m, "Model")
        .def_static("load", &load_model, py::arg("path"))
        .def_property_readonly("hash", [](const LoadedModel& lm) { return lm.hash; })
        .def_property_readonly("classes", [](const LoadedModel& lm) { return lm.model.classifier.classes; })
        .def_property_readonly("config", [](const LoadedModel& lm) { return lm.model.config; })
        .def(
            "classify",
            [](const LoadedModel& lm, const DoubleArray& img, const std::optional<BoolArray>& mask) {
                std::optional<LungMask> m;
                if (mask) m = mask_from(*mask);
                return classification_dict(classify(lm, image_from(img), m));
            },
            py::arg("image"), py::arg("mask") = py::none())
        .def(
            "classify_file",
            [](const LoadedModel& lm, const fs::path& image, const std::optional<fs::path>& mask) {
                const auto bytes = read_file_bytes(image);
                std::optional<std::vector<std::uint8_t>> mask_bytes;
                if (mask) mask_bytes = read_file_bytes(*mask);
                std::optional<std::span<const std::uint8_t>> span;
                if (mask_bytes) span = std::span<const std::uint8_t>(*mask_bytes);
                return classification_dict(classify_bytes(lm, bytes, span));
            },
            py::arg("image"), py::arg("mask") = py::none());
}
