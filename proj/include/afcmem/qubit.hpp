#pragma once

#include "afcmem/propagation.hpp"
#include "afcmem/spectral.hpp"

#include <complex>
#include <utility>

namespace afc {

/// alpha|e> + beta|l>, bins separated by `bin_separation` seconds.
struct TimeBinQubit {
    std::complex<double> early{1.0, 0.0};
    std::complex<double> late{0.0, 0.0};
    double bin_separation = 1.4e-9;

    void validate() const;
    /// arg(beta) - arg(alpha); zero for basis states.
    double phase() const;

    static TimeBinQubit early_state(double tau);
    static TimeBinQubit late_state(double tau);
    /// (|e> + e^{i phi}|l>)/sqrt(2)
    static TimeBinQubit superposition(double phi, double tau);
};

struct ProjectionSetting {
    double analyzer_phase = 0.0;     // theta, rad
    double amplitude_balance = 0.5;  // share of the peak depth given to the first comb
    double recall_time_1 = 6.0e-9;
    double recall_time_2 = 7.4e-9;

    /// Checks t1 > 0, balance in [0,1], and t2 - t1 = tau within `tolerance`.
    void validate(double tau, double tolerance) const;
};

/// Everything needed to turn a qubit into retrieved light: the base comb,
/// the simulation grid, the photon spectrum and the detection window width.
struct MemoryModel {
    CombSpec comb;
    SpectralGrid grid{40e9, std::size_t{1} << 20};
    double pulse_fwhm = 5e9;
    double window = 1e-9;
};

Wavepacket encode(const TimeBinQubit& qubit, const Wavepacket& mode_shape);

/// Comb pair realizing the projection: spacings 1/t1 and 1/t2 at the base
/// comb's finesse, depths split by amplitude_balance, and the second comb
/// shifted so its echo carries the analyzer phase.
std::pair<CombSpec, CombSpec> double_afc_combs(const ProjectionSetting& setting, const CombSpec& base);

TransferFunction make_double_afc(const ProjectionSetting& setting, const CombSpec& base,
                                 const SpectralGrid& grid);

/// Output light for a qubit stored in the single comb of `model`.
Wavepacket retrieve(const MemoryModel& model, const TimeBinQubit& qubit);
/// Output light for a qubit analyzed by the double comb.
Wavepacket retrieve(const MemoryModel& model, const TimeBinQubit& qubit,
                    const ProjectionSetting& setting);

/// Window energies relative to the input energy.
struct ProjectionWindows {
    double early = 0.0;          // t1
    double interference = 0.0;   // t2 = t1 + tau
    double late = 0.0;           // t2 + tau
};

ProjectionWindows project(const MemoryModel& model, const TimeBinQubit& qubit,
                          const ProjectionSetting& setting);

/// Window energies for single-comb storage: early echo at 1/spacing and late
/// echo one bin later, relative to the input energy.
struct StorageWindows {
    double early = 0.0;
    double late = 0.0;
};

StorageWindows store(const MemoryModel& model, const TimeBinQubit& qubit);

} // namespace afc
