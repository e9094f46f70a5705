#pragma once

// Test-only reference implementations for the texture module.

#include <cmath>
#include <cstdint>
#include <vector>

#include "cxr/imaging.hpp"
#include "cxr/segmentation.hpp"

namespace cxr::oracle {

/// Enumerates every ordered pair of pixels and keeps those whose
/// displacement equals (dx, dy) with both endpoints in the mask.
inline std::vector<std::uint64_t> glcm_pairs(const QuantizedImage& q, const LungMask& m, int dx, int dy,
                                             bool symmetric) {
    const int w = q.width(), h = q.height(), L = q.levels();
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(L * L), 0);
    const int n = w * h;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            const int ax = a % w, ay = a / w, bx = b % w, by = b / w;
            if (bx - ax != dx || by - ay != dy) continue;
            if (!m.at(ax, ay) || !m.at(bx, by)) continue;
            const int i = q.bins()[static_cast<std::size_t>(a)];
            const int j = q.bins()[static_cast<std::size_t>(b)];
            counts[static_cast<std::size_t>(i * L + j)] += 1;
            if (symmetric) counts[static_cast<std::size_t>(j * L + i)] += 1;
        }
    }
    return counts;
}

struct HaralickRef {
    double contrast, energy, entropy, variance, homogeneity, dissimilarity, correlation;
};

/// Direct long-double summation of the seven descriptors from a probability
/// table p[i][j].
inline HaralickRef haralick_sum(const std::vector<std::vector<double>>& p) {
    const std::size_t L = p.size();
    long double mx = 0, my = 0;
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = 0; j < L; ++j) {
            mx += static_cast<long double>(i) * p[i][j];
            my += static_cast<long double>(j) * p[i][j];
        }
    long double vx = 0, vy = 0, cov = 0;
    HaralickRef r{};
    long double con = 0, ene = 0, ent = 0, var = 0, hom = 0, dis = 0;
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = 0; j < L; ++j) {
            const long double v = p[i][j];
            const long double di = static_cast<long double>(i) - mx;
            const long double dj = static_cast<long double>(j) - my;
            const long double d = static_cast<long double>(i) - static_cast<long double>(j);
            vx += di * di * v;
            vy += dj * dj * v;
            cov += di * dj * v;
            con += d * d * v;
            ene += v * v;
            if (v > 0) ent -= v * std::log2(v);
            var += di * di * v;
            hom += v / (1 + d * d);
            dis += std::fabs(d) * v;
        }
    r.contrast = static_cast<double>(con);
    r.energy = static_cast<double>(ene);
    r.entropy = static_cast<double>(ent);
    r.variance = static_cast<double>(var);
    r.homogeneity = static_cast<double>(hom);
    r.dissimilarity = static_cast<double>(dis);
    const long double sxy = std::sqrt(vx) * std::sqrt(vy);
    r.correlation = sxy > 0 ? static_cast<double>(cov / sxy) : 0.0;
    return r;
}

} // namespace cxr::oracle
