#include "cxr/fourier.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "cxr/error.hpp"

namespace cxr::fourier {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft(std::span<Complex> data, bool inverse) {
    const std::size_t n = data.size();
    if (n == 0 || (n & (n - 1)) != 0) throw Error("fft: length must be a power of two");
    if (n == 1) return;

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        // Twiddles computed directly per index; the recurrence accumulates
        // rounding error at 256+ points.
        for (std::size_t k = 0; k < half; ++k) {
            const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                                 static_cast<double>(len);
            const Complex w(std::cos(angle), std::sin(angle));
            for (std::size_t start = 0; start < n; start += len) {
                Complex u = data[start + k];
                Complex v = data[start + k + half] * w;
                data[start + k] = u + v;
                data[start + k + half] = u - v;
            }
        }
    }

    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& c : data) c *= scale;
    }
}

void fft2(std::vector<Complex>& grid, std::size_t rows, std::size_t cols, bool inverse) {
    if (grid.size() != rows * cols) throw Error("fft2: grid size mismatch");
    for (std::size_t r = 0; r < rows; ++r) {
        fft(std::span<Complex>(grid.data() + r * cols, cols), inverse);
    }
    std::vector<Complex> column(rows);
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t r = 0; r < rows; ++r) column[r] = grid[r * cols + c];
        fft(column, inverse);
        for (std::size_t r = 0; r < rows; ++r) grid[r * cols + c] = column[r];
    }
}

double signed_frequency(std::size_t k, std::size_t n) {
    const auto kk = static_cast<double>(k);
    const auto nn = static_cast<double>(n);
    return (2 * k < n) ? kk / nn : (kk - nn) / nn;
}

} // namespace cxr::fourier
