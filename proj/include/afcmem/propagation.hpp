#pragma once

#include "afcmem/spectral.hpp"

#include <complex>
#include <vector>

namespace afc {

/// Photon mode on the time grid dual to a SpectralGrid. Sample k sits at
/// grid.time(k); energy is sum |a|^2 dt.
struct Wavepacket {
    SpectralGrid grid;
    std::vector<std::complex<double>> amplitude;
    double carrier_offset = 0.0;
};

/// Transform-limited gaussian pulse whose intensity spectrum has the given
/// FWHM (Hz), centered at `center_time` (s). Normalized to unit energy.
Wavepacket gaussian_pulse(const SpectralGrid& grid, double spectral_fwhm, double center_time = 0.0);

double energy(const Wavepacket& wp);

/// Energy in samples with t in [center - width/2, center + width/2).
double window_energy(const Wavepacket& wp, double center, double width);

/// Energy-weighted mean time over the same window.
double window_centroid(const Wavepacket& wp, double center, double width);

/// Intensity-weighted FWHM-equivalent duration, 2 sqrt(2 ln 2) times the rms width.
double rms_duration(const Wavepacket& wp);

/// Exact band-limited delay by `delay` seconds (circular on the grid).
Wavepacket delayed(const Wavepacket& wp, double delay);

/// Output spectrum = input spectrum x H.
Wavepacket propagate(const Wavepacket& input, const TransferFunction& h);

struct EchoResult {
    Wavepacket output;
    double echo_time = 0.0;
    double echo_efficiency = 0.0;
    double transmitted_fraction = 0.0;
};

/// Echo energy inside [expected_time +- window/2] relative to the input
/// energy. The transmitted fraction is measured in the same-width window at t=0.
EchoResult extract_echo(const Wavepacket& input, const Wavepacket& output, double expected_time,
                        double window);

/// Discrete ensemble of emitters with detunings m_j * spacing.
struct DiscreteEnsemble {
    std::vector<double> detuning_index;              // m_j
    std::vector<std::complex<double>> weights;       // c_j
    double spacing = 0.0;                            // Hz

    void validate() const;

    /// N emitters with integer indices centered on zero and unit weights.
    static DiscreteEnsemble uniform(int n, double spacing);
};

/// |sum_j c_j exp(i 2 pi m_j spacing t)|^2 / (sum_j |c_j|)^2.
double rephasing_amplitude(const DiscreteEnsemble& ensemble, double t);

} // namespace afc
