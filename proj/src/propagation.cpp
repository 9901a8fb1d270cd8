#include "afcmem/propagation.hpp"

#include "afcmem/errors.hpp"
#include "afcmem/fft.hpp"

#include <cmath>
#include <numbers>

namespace afc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <typename F>
void for_window(const Wavepacket& wp, double center, double width, F&& f)
{
    const double lo = center - 0.5 * width;
    const double hi = center + 0.5 * width;
    const auto& g = wp.grid;
    std::size_t k = g.time_index(lo);
    if (k > 0)
        --k;
    for (; k < g.size(); ++k) {
        const double t = g.time(k);
        if (t >= hi)
            break;
        if (t >= lo)
            f(t, std::norm(wp.amplitude[k]));
    }
}

} // namespace

Wavepacket gaussian_pulse(const SpectralGrid& grid, double spectral_fwhm, double center_time)
{
    if (!(spectral_fwhm > 0.0))
        throw ValidationError("pulse spectral FWHM must be positive");
    // Intensity FWHM in time for a transform-limited gaussian.
    const double duration = 2.0 * std::numbers::ln2 / (std::numbers::pi * spectral_fwhm);
    Wavepacket wp{grid, std::vector<std::complex<double>>(grid.size()), 0.0};
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double u = (grid.time(k) - center_time) / duration;
        wp.amplitude[k] = std::exp(-2.0 * std::numbers::ln2 * u * u);
    }
    const double e = energy(wp);
    if (!(e > 0.0))
        throw ValidationError("pulse is not resolved by the time grid");
    const double s = 1.0 / std::sqrt(e);
    for (auto& a : wp.amplitude)
        a *= s;
    return wp;
}

double energy(const Wavepacket& wp)
{
    double sum = 0.0;
    for (const auto& a : wp.amplitude)
        sum += std::norm(a);
    return sum * wp.grid.time_step();
}

double window_energy(const Wavepacket& wp, double center, double width)
{
    double sum = 0.0;
    for_window(wp, center, width, [&](double, double p) { sum += p; });
    return sum * wp.grid.time_step();
}

double window_centroid(const Wavepacket& wp, double center, double width)
{
    double sum = 0.0;
    double moment = 0.0;
    for_window(wp, center, width, [&](double t, double p) {
        sum += p;
        moment += p * t;
    });
    return sum > 0.0 ? moment / sum : center;
}

double rms_duration(const Wavepacket& wp)
{
    double sum = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < wp.grid.size(); ++k) {
        const double p = std::norm(wp.amplitude[k]);
        const double t = wp.grid.time(k);
        sum += p;
        m1 += p * t;
    }
    if (!(sum > 0.0))
        return 0.0;
    m1 /= sum;
    for (std::size_t k = 0; k < wp.grid.size(); ++k) {
        const double dt = wp.grid.time(k) - m1;
        m2 += std::norm(wp.amplitude[k]) * dt * dt;
    }
    return 2.0 * std::sqrt(2.0 * std::numbers::ln2) * std::sqrt(m2 / sum);
}

Wavepacket delayed(const Wavepacket& wp, double delay)
{
    auto spec = fft::ifftshift<std::complex<double>>(wp.amplitude);
    fft::forward(spec);
    const std::size_t n = spec.size();
    const double df = wp.grid.resolution();
    for (std::size_t i = 0; i < n; ++i) {
        const double f = (i < n / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n)) * df;
        spec[i] *= std::polar(1.0, -kTwoPi * f * delay);
    }
    fft::inverse(spec);
    return Wavepacket{wp.grid, fft::fftshift<std::complex<double>>(spec), wp.carrier_offset};
}

Wavepacket propagate(const Wavepacket& input, const TransferFunction& h)
{
    if (!(input.grid == h.grid) || input.amplitude.size() != h.values.size())
        throw ValidationError("propagate: wavepacket time grid is not the dual of the filter grid");
    auto spec = fft::ifftshift<std::complex<double>>(input.amplitude);
    fft::forward(spec);
    const auto filter = fft::ifftshift<std::complex<double>>(h.values);
    for (std::size_t i = 0; i < spec.size(); ++i)
        spec[i] *= filter[i];
    fft::inverse(spec);
    return Wavepacket{input.grid, fft::fftshift<std::complex<double>>(spec), input.carrier_offset};
}

EchoResult extract_echo(const Wavepacket& input, const Wavepacket& output, double expected_time,
                        double window)
{
    if (!(window > 0.0))
        throw ValidationError("echo window must be positive");
    const double half_span = 0.5 * output.grid.time_span();
    if (!(std::abs(expected_time) < half_span))
        throw ValidationError("expected echo time lies outside the time grid");
    if (std::abs(expected_time) <= 0.5 * window)
        throw ValidationError("echo window overlaps the transmitted pulse at t = 0");
    const double e_in = energy(input);
    if (!(e_in > 0.0))
        throw ValidationError("input wavepacket has no energy");

    EchoResult r{output, window_centroid(output, expected_time, window),
                 window_energy(output, expected_time, window) / e_in,
                 window_energy(output, 0.0, window) / e_in};
    return r;
}

void DiscreteEnsemble::validate() const
{
    if (detuning_index.size() < 2 || detuning_index.size() != weights.size())
        throw ValidationError("ensemble needs at least two emitters with one weight each");
    bool any = false;
    for (const auto& c : weights)
        any = any || std::abs(c) > 0.0;
    if (!any)
        throw ValidationError("ensemble weights are all zero");
}

DiscreteEnsemble DiscreteEnsemble::uniform(int n, double spacing)
{
    DiscreteEnsemble e;
    e.spacing = spacing;
    const int lo = -(n / 2);
    for (int j = 0; j < n; ++j) {
        e.detuning_index.push_back(static_cast<double>(lo + j));
        e.weights.emplace_back(1.0, 0.0);
    }
    return e;
}

double rephasing_amplitude(const DiscreteEnsemble& ensemble, double t)
{
    ensemble.validate();
    std::complex<double> sum{0.0, 0.0};
    double norm = 0.0;
    for (std::size_t j = 0; j < ensemble.weights.size(); ++j) {
        // Reduce the phase mod 2 pi before evaluating to keep integer-detuning
        // rephasing exact at long times.
        const double cycles = ensemble.detuning_index[j] * ensemble.spacing * t;
        const double frac = cycles - std::round(cycles);
        sum += ensemble.weights[j] * std::polar(1.0, kTwoPi * frac);
        norm += std::abs(ensemble.weights[j]);
    }
    return std::norm(sum) / (norm * norm);
}

} // namespace afc
