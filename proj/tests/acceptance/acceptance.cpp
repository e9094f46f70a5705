// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cxr/error.hpp"
#include "cxr/learn/cluster.hpp"
#include "cxr/learn/pca.hpp"
#include "cxr/learn/tree.hpp"
#include "cxr/learn/validation.hpp"
#include "cxr/pipeline/config.hpp"
#include "cxr/pipeline/dataset.hpp"
#include "cxr/pipeline/extract.hpp"
#include "cxr/pipeline/hash.hpp"
#include "cxr/pipeline/model.hpp"
#include "cxr/pipeline/service.hpp"
#include "cxr/pipeline/stages.hpp"
#include "cxr/random.hpp"
#include "cxr/stats.hpp"
#include "cxr/texture.hpp"
#include "cxr/wavelets.hpp"
#include "test_support.hpp"
#include "unit/learn_oracles.hpp"
#include "unit/texture_oracles.hpp"

// After Eigen: <resolv.h> defines a _res macro that breaks Eigen headers.
#include <httplib.h>

using namespace cxr;
using namespace cxr::pipeline;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects failures without stopping at the first one.
struct Checker {
    Outcome out;
    void require(bool ok, const std::string& what) {
        if (!ok && out.pass) out.detail = what;
        out.pass = out.pass && ok;
    }
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 3) {
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// ---- 1. GLCM counts versus brute-force pair enumeration -------------------

Outcome glcm_oracle() {
    Checker c;
    Rng rng(20240601);
    int compared = 0;
    for (int image = 0; image < 200; ++image) {
        const int levels = 2 + static_cast<int>(rng.below(15));
        std::vector<int> bins(256);
        for (auto& b : bins) b = static_cast<int>(rng.below(static_cast<std::uint64_t>(levels)));
        const QuantizedImage q(16, 16, levels, bins);
        std::vector<std::uint8_t> bits(256, 1);
        if (image % 2 == 1) {
            for (auto& b : bits) b = rng.uniform() < 0.75 ? 1 : 0;
        }
        const LungMask mask(16, 16, bits);
        for (int k = 0; k < 4; ++k) {
            const GlcmOffset off{1 + static_cast<int>(rng.below(5)), 45.0 * static_cast<double>(rng.below(4))};
            for (bool symmetric : {false, true}) {
                const auto want = oracle::glcm_pairs(q, mask, off.dx(), off.dy(), symmetric);
                std::uint64_t total = 0;
                for (auto v : want) total += v;
                if (total == 0) continue; // no valid pairs: glcm_counts rejects these by design
                c.require(glcm_counts(q, mask, off, symmetric) == want,
                          "mismatch at image " + std::to_string(image));
                ++compared;
            }
        }
    }
    c.out.detail = c.out.pass ? std::to_string(compared) + " matrices equal the oracle" : c.out.detail;
    return c.out;
}

// ---- 2. Haralick closed forms ---------------------------------------------

Outcome haralick_closed_forms() {
    Checker c;
    auto close = [&](double got, double want, const std::string& what) {
        c.require(std::abs(got - want) <= 1e-12, what + " = " + fmt(got, 17) + ", want " + fmt(want, 17));
    };
    for (int L : {2, 5, 100}) {
        Glcm g{L, std::vector<double>(static_cast<std::size_t>(L * L), 0.0)};
        g.p[0] = 1.0;
        const HaralickVector h = haralick_features(g);
        const std::string tag = "constant L=" + std::to_string(L) + " ";
        close(h.contrast, 0.0, tag + "contrast");
        close(h.energy, 1.0, tag + "energy");
        close(h.entropy, 0.0, tag + "entropy");
        close(h.homogeneity, 1.0, tag + "homogeneity");
        close(h.dissimilarity, 0.0, tag + "dissimilarity");
        close(h.variance, 0.0, tag + "variance");
        close(h.correlation, 0.0, tag + "correlation");
    }
    // Uniform p = 1/L^2: i and j are independent uniforms on 0..L-1.
    for (int L : {2, 4, 8, 16, 100}) {
        const double n = L;
        Glcm g{L, std::vector<double>(static_cast<std::size_t>(L * L), 1.0 / (n * n))};
        const HaralickVector h = haralick_features(g);
        double homogeneity = 0.0;
        for (int d = -(L - 1); d <= L - 1; ++d) homogeneity += (n - std::abs(d)) / (1.0 + d * d);
        homogeneity /= n * n;
        const std::string tag = "uniform L=" + std::to_string(L) + " ";
        close(h.energy, 1.0 / (n * n), tag + "energy");
        close(h.entropy, 2.0 * std::log2(n), tag + "entropy");
        close(h.variance, (n * n - 1.0) / 12.0, tag + "variance");
        close(h.contrast, (n * n - 1.0) / 6.0, tag + "contrast");
        close(h.dissimilarity, (n * n - 1.0) / (3.0 * n), tag + "dissimilarity");
        close(h.homogeneity, homogeneity, tag + "homogeneity");
        close(h.correlation, 0.0, tag + "correlation");
    }
    if (c.out.pass) c.out.detail = "constant and uniform cases within 1e-12";
    return c.out;
}

// ---- 3. Wavelet round trip ------------------------------------------------

Outcome wavelet_round_trip() {
    Checker c;
    Rng rng(3);
    double worst_err = 0.0, worst_energy = 0.0;
    for (auto [rows, cols] : std::vector<std::pair<int, int>>{{31, 47}, {64, 64}, {256, 256}}) {
        for (Wavelet w : {Wavelet::haar, Wavelet::db4}) {
            for (int levels = 1; levels <= 4; ++levels) {
                Plane img(rows, cols);
                for (auto& v : img.data) v = rng.normal();
                const WaveletPyramid pyr = dwt2(img, w, levels);
                const Plane back = idwt2(pyr);
                double err = 0.0;
                for (std::size_t i = 0; i < img.size(); ++i) err = std::max(err, std::abs(back.data[i] - img.data[i]));
                long double e_img = 0, e_pyr = 0;
                for (double v : img.data) e_img += static_cast<long double>(v) * v;
                for (const auto& level : pyr.levels) {
                    for (const Plane* band : {&level.hl, &level.lh, &level.hh}) {
                        for (double v : band->data) e_pyr += static_cast<long double>(v) * v;
                    }
                }
                for (double v : pyr.approximation.data) e_pyr += static_cast<long double>(v) * v;
                const double rel = static_cast<double>(std::abs(e_pyr - e_img) / e_img);
                worst_err = std::max(worst_err, err);
                worst_energy = std::max(worst_energy, rel);
                const std::string tag = std::to_string(rows) + "x" + std::to_string(cols) + " " +
                                        std::string(to_string(w)) + " L" + std::to_string(levels);
                c.require(err <= 1e-9, tag + " reconstruction error " + fmt(err));
                c.require(rel <= 1e-6, tag + " energy error " + fmt(rel));
            }
        }
    }
    if (c.out.pass) c.out.detail = "max error " + fmt(worst_err) + ", max energy drift " + fmt(worst_energy);
    return c.out;
}

// ---- 4. PCA versus covariance eigendecomposition ----------------------------

Outcome pca_oracle() {
    Checker c;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const int rows = 30 + static_cast<int>(seed) * 5;
        const int cols = 2 + static_cast<int>(seed % 7);
        const Eigen::MatrixXd x = oracle::gaussian_table(rows, cols, seed);
        const learn::PcaModel m = learn::pca_fit(x, cols);
        const oracle::Eigenpairs ref = oracle::covariance_eigen(x);
        for (int k = 0; k < cols; ++k) {
            const auto ks = static_cast<std::size_t>(k);
            worst = std::max(worst, std::abs(m.explained_variance(k) - ref.values[ks]));
            for (int j = 0; j < cols; ++j) {
                worst = std::max(worst, std::abs(m.components(k, j) - ref.vectors[ks][static_cast<std::size_t>(j)]));
            }
        }
        c.require(worst <= 1e-8, "table " + std::to_string(seed) + " differs by " + fmt(worst));
    }
    if (c.out.pass) c.out.detail = "20 tables, max deviation " + fmt(worst);
    return c.out;
}

// ---- 5. X-means on three blobs ----------------------------------------------

// Adjusted Rand index from the contingency table (Hubert and Arabie).
double ari_oracle(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<std::pair<int, int>, double> cells;
    std::map<int, double> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cells[{a[i], b[i]}] += 1;
        rows[a[i]] += 1;
        cols[b[i]] += 1;
    }
    auto pairs = [](double n) { return n * (n - 1) / 2; };
    double index = 0, sum_a = 0, sum_b = 0;
    for (const auto& [k, n] : cells) index += pairs(n);
    for (const auto& [k, n] : rows) sum_a += pairs(n);
    for (const auto& [k, n] : cols) sum_b += pairs(n);
    const double expected = sum_a * sum_b / pairs(static_cast<double>(a.size()));
    const double max_index = (sum_a + sum_b) / 2;
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

Outcome xmeans_blobs() {
    Checker c;
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto blobs = oracle::gaussian_blobs(3, 100, 7, 1.0, 10.0, 5000 + seed);
        const learn::ClusterModel m = learn::xmeans(blobs.x, 1, 10, seed);
        if (m.k == 3 && ari_oracle(m.assignments, blobs.labels) >= 0.99) ++hits;
    }
    c.require(hits >= 95, "k=3 with ARI >= 0.99 on only " + std::to_string(hits) + "/100 seeds");
    if (c.out.pass) c.out.detail = "k=3 with ARI >= 0.99 on " + std::to_string(hits) + "/100 seeds";
    return c.out;
}

// ---- 6, 9, 10. Synthetic end-to-end ----------------------------------------

struct EndToEnd {
    testing::TempDir dir;
    PipelineConfig cfg; // defaults: {entropy, gini} x depth 1..20, 3 folds, 1 thread
    Manifest manifest;
    TrainedModel model;
};

EndToEnd& end_to_end() {
    static EndToEnd e;
    return e;
}

Manifest synth_into(const fs::path& dir, const PipelineConfig& cfg) {
    SynthSpec spec;
    spec.per_class = 100;
    spec.width = spec.height = 128;
    spec.seed = stage_seed(cfg, SeedStream::synth);
    return make_synthetic_dataset(spec, dir);
}

Outcome synthetic_end_to_end() {
    Checker c;
    auto& e = end_to_end();
    e.manifest = synth_into(e.dir / "data", e.cfg);
    c.require(e.manifest.size() == 400, "expected 400 images");
    c.require(e.manifest.labels().size() == 4, "expected 4 classes");
    const Extraction ex = extract_features(e.manifest, e.cfg);
    c.require(ex.errors.empty(), "extraction errors");
    e.model = run_train(ex.table, e.cfg);
    save_model(e.dir / "model.json", e.model);

    const auto& r = e.model.report;
    const std::string summary = r.summary.mean_pm_std();
    c.require(r.summary.mean >= 0.93, "mean accuracy " + summary);
    c.require(std::regex_match(summary, std::regex(R"(\d\.\d\d ± \d\.\d\d\d)")), "summary format " + summary);
    c.require(r.cells.size() == 2 * 20 && r.cv_folds == 3, "grid shape");

    const TrainedModel again = run_train(ex.table, e.cfg);
    c.require(again.report.best_criterion == r.best_criterion && again.report.best_depth == r.best_depth,
              "best cell not reproducible");
    c.require(model_text(again) == model_text(e.model), "retrained model differs");
    if (c.out.pass) {
        c.out.detail = "accuracy " + summary + ", best " + std::string(learn::to_string(r.best_criterion)) +
                       " depth " + std::to_string(r.best_depth);
    }
    return c.out;
}

// ---- 7. Decision tree --------------------------------------------------------

Outcome tree_exactness() {
    Checker c;
    Eigen::MatrixXd xor_x(4, 2);
    xor_x << 0, 0, 0, 1, 1, 0, 1, 1;
    const std::vector<int> xor_y{0, 1, 1, 0};
    for (auto crit : {learn::Criterion::entropy, learn::Criterion::gini}) {
        for (int depth = 2; depth <= 6; ++depth) {
            learn::TreeParams p;
            p.criterion = crit;
            p.max_depth = depth;
            c.require(learn::tree_fit(xor_x, xor_y, 2, p).predict(xor_x) == xor_y,
                      "XOR not fit at depth " + std::to_string(depth));
        }
    }

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        Eigen::MatrixXd x(120, 5);
        std::vector<int> y(120);
        for (int i = 0; i < 120; ++i) {
            for (int j = 0; j < 5; ++j) x(i, j) = rng.uniform();
            y[static_cast<std::size_t>(i)] = rng.uniform() < 0.25 ? static_cast<int>(rng.below(3))
                                                                  : (x(i, 0) > x(i, 1)) + (x(i, 3) > 0.6);
        }
        double previous = -1.0;
        for (int depth = 1; depth <= 20; ++depth) {
            learn::TreeParams p;
            p.criterion = seed % 2 ? learn::Criterion::gini : learn::Criterion::entropy;
            p.max_depth = depth;
            const auto pred = learn::tree_fit(x, y, 3, p).predict(x);
            int hits = 0;
            for (std::size_t i = 0; i < y.size(); ++i) hits += pred[i] == y[i];
            const double acc = hits / 120.0;
            c.require(acc >= previous, "accuracy drops at depth " + std::to_string(depth) + ", dataset " + std::to_string(seed));
            previous = acc;
        }
    }

    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 2 + static_cast<int>(rng.below(4));
        const int classes = 2 + static_cast<int>(rng.below(4));
        // Every class needs at least k members; the rest of the labels are random.
        std::vector<int> y;
        for (int cls = 0; cls < classes; ++cls) y.insert(y.end(), static_cast<std::size_t>(k), cls);
        for (int extra = static_cast<int>(rng.below(80)); extra > 0; --extra) {
            y.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(classes))));
        }
        rng.shuffle(y.begin(), y.end());
        const auto folds = learn::stratified_kfold(y, k, static_cast<std::uint64_t>(trial));
        for (int cls = 0; cls < classes; ++cls) {
            int lo = 1 << 30, hi = 0;
            for (const auto& f : folds) {
                int n = 0;
                for (auto i : f.test) n += y[i] == cls;
                lo = std::min(lo, n);
                hi = std::max(hi, n);
            }
            c.require(hi - lo <= 1, "fold counts differ by " + std::to_string(hi - lo) + " in trial " + std::to_string(trial));
        }
    }
    if (c.out.pass) c.out.detail = "XOR, 20 monotone datasets, 100 stratified label vectors";
    return c.out;
}

// ---- 8. Statistics -------------------------------------------------------------

Outcome statistics_oracles(const fs::path& fixture) {
    Checker c;
    std::ifstream in(fixture);
    if (!in) return {false, "missing fixture " + fixture.string()};
    const auto ref = nlohmann::json::parse(in);
    int datasets = 0;
    for (const auto& d : ref["anova"]) {
        std::vector<stats::Group> groups;
        int g = 0;
        for (const auto& values : d["groups"]) groups.push_back({"g" + std::to_string(g++), values.get<std::vector<double>>()});
        const auto anova = stats::anova_oneway(groups);
        const double f = d["f"].get<double>();
        c.require(std::abs(anova.f - f) <= 1e-6 * std::abs(f), "F differs on dataset " + std::to_string(datasets));
        const auto rows = stats::tukey_kramer(groups, 0.05);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            c.require(rows[i].significant == d["tukey"][i]["significant"].get<bool>(),
                      "Tukey significance differs on dataset " + std::to_string(datasets));
        }
        ++datasets;
    }
    c.require(datasets == 10, "expected 10 reference datasets");

    int accepted = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(9000 + seed);
        std::vector<double> x(500);
        for (auto& v : x) v = rng.normal(5.0, 2.0);
        if (stats::shapiro_wilk(x).p > 0.05) ++accepted;
    }
    c.require(accepted >= 95, "normal samples accepted " + std::to_string(accepted) + "/100");
    double worst_bimodal = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        std::vector<double> x;
        for (int i = 0; i < 200; ++i) x.push_back(rng.normal(i % 2 ? 3.0 : -3.0, 1.0));
        worst_bimodal = std::max(worst_bimodal, stats::shapiro_wilk(x).p);
    }
    c.require(worst_bimodal < 1e-6, "bimodal p " + fmt(worst_bimodal));
    if (c.out.pass) {
        c.out.detail = "10 reference datasets, normal accepted " + std::to_string(accepted) +
                       "/100, bimodal max p " + fmt(worst_bimodal);
    }
    return c.out;
}

// ---- 9. Determinism ------------------------------------------------------------

Outcome determinism() {
    Checker c;
    const PipelineConfig cfg;
    testing::TempDir dir;
    std::array<std::string, 2> hashes;
    for (int run = 0; run < 2; ++run) {
        const fs::path root = dir / ("run" + std::to_string(run));
        const Manifest m = synth_into(root / "data", cfg);
        hashes[static_cast<std::size_t>(run)] = run_all(m, cfg, root / "out").content_hash;
    }
    c.require(hashes[0] == hashes[1], "content hashes differ");
    c.require(slurp(dir / "run0" / "out" / "model.json") == model_text(end_to_end().model),
              "run model differs from the end-to-end model");
    if (c.out.pass) c.out.detail = "content hash " + hashes[0].substr(0, 16);
    return c.out;
}

// ---- 10. Service parity ----------------------------------------------------------

std::string run_cli(const std::string& command) {
    std::string out;
    FILE* pipe = ::popen(command.c_str(), "r");
    if (!pipe) return out;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) out += buf.data();
    ::pclose(pipe);
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
    return out;
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome service_parity(const fs::path& cli) {
    Checker c;
    auto& e = end_to_end();
    if (e.manifest.size() == 0) return {false, "end-to-end dataset unavailable"};
    const fs::path model_path = e.dir / "model.json";
    const std::string file_hash = sha256_file(model_path);

    ClassifyService service(load_model(model_path));
    const int port = service.bind("127.0.0.1", 0);
    std::thread server([&] { service.listen(); });
    service.wait_until_ready();
    httplib::Client client("127.0.0.1", port);

    const auto health = client.Get("/healthz");
    c.require(health && health->status == 200, "healthz not 200");
    if (health) c.require(nlohmann::json::parse(health->body)["model_hash"] == file_hash, "healthz hash differs");

    const auto labels = e.manifest.labels();
    int equal = 0;
    for (std::size_t i = 0; i < 20; ++i) {
        const auto& row = e.manifest.rows[i * e.manifest.size() / 20];
        const std::string expected = run_cli(quote(cli) + " classify --model " + quote(model_path) + " --image " +
                                             quote(row.image) + " --mask " + quote(*row.mask));
        httplib::MultipartFormDataItems items{{"image", slurp(row.image), row.image.filename().string(), ""},
                                              {"mask", slurp(*row.mask), row.mask->filename().string(), ""}};
        const auto res = client.Post("/classify", items);
        const bool ok = res && res->status == 200 && res->body == expected && !expected.empty();
        c.require(ok, "response differs from CLI for " + row.id);
        if (ok) {
            const auto doc = nlohmann::json::parse(res->body);
            const auto label = doc["label"].get<std::string>();
            c.require(std::find(labels.begin(), labels.end(), label) != labels.end(), "unknown label " + label);
            c.require(doc["model_hash"] == file_hash, "model hash differs");
            ++equal;
        }
    }
    service.stop();
    server.join();
    if (c.out.pass) c.out.detail = std::to_string(equal) + "/20 responses equal the CLI, healthz hash matches";
    return c.out;
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: acceptance <stats_reference.json> <cxr executable>\n";
        return 1;
    }
    const fs::path fixture = argv[1];
    const fs::path cli = argv[2];

    struct Criterion {
        int number;
        std::string name;
        double limit_seconds; // 0 = no limit
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "GLCM oracle equivalence", 10, glcm_oracle},
        {2, "Haralick analytic values", 0, haralick_closed_forms},
        {3, "wavelet round trip", 30, wavelet_round_trip},
        {4, "PCA oracle", 0, pca_oracle},
        {5, "X-means model selection", 60, xmeans_blobs},
        {6, "synthetic end-to-end", 300, synthetic_end_to_end},
        {7, "decision-tree exactness", 0, tree_exactness},
        {8, "statistics oracles", 0, [&] { return statistics_oracles(fixture); }},
        {9, "determinism", 0, determinism},
        {10, "service parity", 0, [&] { return service_parity(cli); }},
    };

    int failed = 0;
    for (const auto& criterion : criteria) {
        const auto start = Clock::now();
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& ex) {
            outcome = {false, std::string("exception: ") + ex.what()};
        }
        const double elapsed = seconds_since(start);
        if (criterion.limit_seconds > 0 && elapsed >= criterion.limit_seconds) {
            outcome.pass = false;
            outcome.detail += "; took " + fmt(elapsed) + " s, limit " + fmt(criterion.limit_seconds) + " s";
        }
        failed += outcome.pass ? 0 : 1;
        std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << criterion.number << " (" << criterion.name
                  << "): " << outcome.detail << " [" << fmt(elapsed) << " s]" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
