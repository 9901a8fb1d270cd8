#pragma once

#include <complex>
#include <span>
#include <vector>

namespace afc::fft {

using cvec = std::vector<std::complex<double>>;

/// In-place unnormalized DFT, X[k] = sum_n x[n] exp(-2 pi i k n / N).
void forward(std::span<std::complex<double>> data);

/// In-place inverse DFT including the 1/N factor.
void inverse(std::span<std::complex<double>> data);

/// Reorders a centered array (index N/2 holds zero frequency/time) into
/// FFT order (index 0 holds zero). N must be even.
template <typename T>
std::vector<T> ifftshift(std::span<const T> centered)
{
    const std::size_t n = centered.size();
    const std::size_t h = n / 2;
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = centered[(i + h) % n];
    return out;
}

/// Inverse of ifftshift.
template <typename T>
std::vector<T> fftshift(std::span<const T> ordered)
{
    const std::size_t n = ordered.size();
    const std::size_t h = n / 2;
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[(i + h) % n] = ordered[i];
    return out;
}

} // namespace afc::fft
