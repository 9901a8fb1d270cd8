#pragma once

#include <complex>
#include <cstddef>
#include <string_view>
#include <vector>

namespace afc {

enum class ToothShape { gaussian, lorentzian, square };

ToothShape parse_tooth_shape(std::string_view name);
std::string_view to_string(ToothShape shape);

/// Spectral description of an atomic frequency comb. All frequencies in Hz,
/// relative to the photon carrier.
struct CombSpec {
    double center_offset = 0.0;
    double bandwidth = 5e9;
    double tooth_spacing = 167e6;
    double tooth_width = 83e6; // FWHM
    ToothShape tooth_shape = ToothShape::gaussian;
    double peak_optical_depth = 1.0;
    double background_optical_depth = 0.0;
    double amplitude_weight = 1.0;

    double finesse() const { return tooth_spacing / tooth_width; }

    /// Throws ValidationError naming the first violated invariant.
    void validate() const;
};

/// Uniform frequency grid of n_points samples spanning `span` Hz. Sample k
/// sits at (k - n/2) * resolution; its dual time grid has step 1/span.
class SpectralGrid {
public:
    SpectralGrid(double span, std::size_t n_points);

    double span() const { return span_; }
    std::size_t size() const { return n_; }
    double resolution() const { return span_ / static_cast<double>(n_); }
    double frequency(std::size_t k) const;

    double time_step() const { return 1.0 / span_; }
    double time_span() const { return static_cast<double>(n_) / span_; }
    double time(std::size_t k) const;
    /// Index of the time sample closest to t (clamped to the grid).
    std::size_t time_index(double t) const;

    /// Throws ValidationError if the grid cannot resolve the comb.
    void check_resolves(const CombSpec& spec) const;

    bool operator==(const SpectralGrid&) const = default;

private:
    double span_;
    std::size_t n_;
};

/// Optical depth per frequency sample.
struct AbsorptionProfile {
    SpectralGrid grid;
    std::vector<double> depth;
};

struct TransferFunction {
    SpectralGrid grid;
    std::vector<std::complex<double>> values; // centered order, like the grid
};

/// Frequencies of the teeth inside the band, ascending.
std::vector<double> tooth_centers(const CombSpec& spec);

/// Single-tooth lineshape normalized to 1 at its center.
double tooth_lineshape(ToothShape shape, double detuning, double fwhm);

AbsorptionProfile build_absorption(const CombSpec& spec, const SpectralGrid& grid);

/// Pointwise sum of the weighted comb profiles of `a` and `b`.
AbsorptionProfile superpose(const CombSpec& a, const CombSpec& b, const SpectralGrid& grid);
AbsorptionProfile superpose(const AbsorptionProfile& a, const AbsorptionProfile& b);

/// Minimum-phase linear response exp(-alpha/2 - i Phi) of an absorber with
/// optical depth alpha; Phi is the discrete Hilbert transform of alpha/2.
TransferFunction to_transfer_function(const AbsorptionProfile& profile);

/// Phase -arg(H) per sample, as produced by to_transfer_function.
std::vector<double> minimum_phase(const std::vector<double>& depth);

} // namespace afc
