// numerics.hpp — deterministic summation, Gauss–Legendre rules, FFT helpers

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace biphoton::numerics {

// Pairwise (cascade) summation with a fixed split order, so results do not
// depend on how callers partition work across threads.
double pairwise_sum(std::span<const double> values) noexcept;

struct GaussLegendreRule {
    std::vector<double> nodes;    // on [-1, 1], ascending
    std::vector<double> weights;
};

// n-point rule computed by Newton iteration on P_n; cached per n.
const GaussLegendreRule& gauss_legendre(std::size_t n);

using cvec = std::vector<std::complex<double>>;

// Unnormalized forward DFT: X_k = sum_j x_j e^{-2 pi i jk/N}. Input is zero
// padded (or truncated) to n when n != x.size().
cvec fft(const cvec& x, std::size_t n = 0);
// Normalized inverse: x_j = (1/N) sum_k X_k e^{+2 pi i jk/N}.
cvec ifft(const cvec& X);
// 2-D forward DFT of a row-major rows x cols array.
cvec fft2(const cvec& x, std::size_t rows, std::size_t cols);

// Signed angular frequency of DFT bin k for N samples at spacing dt.
double bin_frequency(std::size_t k, std::size_t n, double dt) noexcept;

std::size_t next_pow2(std::size_t n) noexcept;

}  // namespace biphoton::numerics
