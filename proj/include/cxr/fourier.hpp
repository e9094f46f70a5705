#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cxr::fourier {

using Complex = std::complex<double>;

std::size_t next_pow2(std::size_t n);

/// In-place iterative radix-2 FFT. `data.size()` must be a power of two.
/// The inverse transform includes the 1/N factor.
void fft(std::span<Complex> data, bool inverse);

/// 2-D transform of a row-major rows x cols grid (both powers of two),
/// rows first then columns.
void fft2(std::vector<Complex>& grid, std::size_t rows, std::size_t cols, bool inverse);

/// Signed frequency of index k on an n-point grid, in cycles per sample:
/// k/n for k < n/2, (k - n)/n otherwise.
double signed_frequency(std::size_t k, std::size_t n);

} // namespace cxr::fourier
