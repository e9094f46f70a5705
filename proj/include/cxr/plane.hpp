#pragma once

#include <cstddef>
#include <vector>

namespace cxr {

/// Dense row-major grid of reals. Used for wavelet bands, raw filter
/// responses and other intermediate results that are not bounded to [0, 1].
struct Plane {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Plane() = default;
    Plane(int rows_, int cols_, double fill = 0.0)
        : rows(rows_), cols(cols_),
          data(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_), fill) {}

    double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    std::size_t size() const { return data.size(); }
};

} // namespace cxr
