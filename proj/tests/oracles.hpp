#pragma once

// Slow reference implementations the library is checked against.

#include "afcmem/montecarlo.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

/// Minimum phase of exp(-depth/2) from the discrete Hilbert kernel,
/// O(N^2). depth is in centered order; the result is -arg H, centered.
inline std::vector<double> hilbert_phase(const std::vector<double>& depth)
{
    const std::size_t n = depth.size();
    const std::size_t h = n / 2;
    std::vector<double> l(n); // log|H| in FFT order
    for (std::size_t i = 0; i < n; ++i)
        l[i] = -0.5 * depth[(i + h) % n];
    std::vector<double> phase_fft(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            const std::size_t d = (k + n - m) % n;
            if (d % 2 == 1)
                s += l[m] * (-2.0 / std::tan(std::numbers::pi * static_cast<double>(d) / static_cast<double>(n)));
        }
        phase_fft[k] = s / static_cast<double>(n); // Im log H
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[(i + h) % n] = -phase_fft[i];
    return out;
}

/// Echo efficiency of a thin comb in the large-bandwidth limit.
inline double square_comb_efficiency(double d, double finesse)
{
    const double dt = d / finesse;
    const double s = std::sin(std::numbers::pi / finesse) / (std::numbers::pi / finesse);
    return dt * dt * std::exp(-dt) * s * s;
}

inline double gaussian_comb_efficiency(double d, double finesse)
{
    const double dt = d * std::sqrt(std::numbers::pi / (4.0 * std::log(2.0))) / finesse;
    return dt * dt * std::exp(-dt) * std::exp(-std::numbers::pi * std::numbers::pi / (2.0 * std::log(2.0) * finesse * finesse));
}

/// Conditional events by checking every (Si, InGaAs) pair.
inline std::vector<std::size_t> conditional_pairs(const afc::EventLog& log)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < log.events.size(); ++i) {
        const auto& si = log.events[i];
        if (si.detector != afc::DetectorId::si || !si.gate)
            continue;
        const auto gate = log.meta.frame.gate_of(si.time_ps);
        for (const auto& other : log.events)
            if (other.detector == afc::DetectorId::ingaas && other.time_ps >= gate.first &&
                other.time_ps < gate.second) {
                out.push_back(i);
                break;
            }
    }
    return out;
}

/// Frame time of t by repeated subtraction instead of division.
inline std::int64_t frame_time(const afc::Frame& f, std::int64_t t)
{
    std::int64_t c = 0;
    while ((c + 1) * f.cycle_ps <= t)
        ++c;
    while (c * f.cycle_ps > t)
        --c;
    std::int64_t x = t - c * f.cycle_ps - f.storage_start_ps;
    while (x >= f.period_ps - f.offset_ps)
        x -= f.period_ps;
    while (x < -f.offset_ps)
        x += f.period_ps;
    return x;
}

/// Histogram counts recomputed event by event against bin edges.
inline std::vector<std::uint64_t> recount(const afc::EventLog& log, const std::vector<std::size_t>& which,
                                          std::int64_t origin, std::int64_t width, std::size_t bins)
{
    std::vector<std::uint64_t> counts(bins, 0);
    for (auto i : which) {
        const std::int64_t ft = frame_time(log.meta.frame, log.events[i].time_ps);
        for (std::size_t b = 0; b < bins; ++b) {
            const std::int64_t lo = origin + static_cast<std::int64_t>(b) * width;
            if (ft >= lo && ft < lo + width) {
                ++counts[b];
                break;
            }
        }
    }
    return counts;
}

} // namespace oracle
