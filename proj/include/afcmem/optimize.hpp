#pragma once

#include "afcmem/propagation.hpp"
#include "afcmem/spectral.hpp"

#include <functional>

namespace afc {

struct GoldenResult {
    double x = 0.0;
    double value = 0.0;
    int iterations = 0;
};

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
/// Stops when the bracket is narrower than `tolerance`; throws
/// ConvergenceError if that takes more than `max_iterations`.
GoldenResult golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                     double tolerance, int max_iterations);

/// Coarse scan on `scan_points` equally spaced samples, then golden-section
/// refinement inside the bracket around the best sample.
GoldenResult scan_then_golden(const std::function<double(double)>& f, double lo, double hi,
                              int scan_points, double tolerance, int max_iterations);

/// Echo efficiency of a single comb probed by a gaussian pulse of the given
/// spectral FWHM, measured in `window` around t = 1/tooth_spacing.
EchoResult single_afc_echo(const CombSpec& spec, const SpectralGrid& grid, double pulse_fwhm,
                           double window = 1e-9);

struct OptimizeOptions {
    double finesse_min = 1.5;
    double finesse_max = 30.0;
    double effective_depth_min = 0.0; // d / F
    double effective_depth_max = 6.0;
    double background_depth = 0.0;
    double samples_per_tooth = 32.0; // grid samples across the narrowest tooth
    double teeth_in_band = 24.0;       // comb bandwidth in units of the spacing
    double probe_fraction = 0.125;     // probe FWHM relative to the comb bandwidth
    double window = 0.0;               // echo window; 0 selects half a recall period
    double tolerance = 1e-3;
    int max_iterations = 100;
};

struct OptimizationResult {
    double finesse = 0.0;
    double peak_depth = 0.0;
    double efficiency = 0.0;
    int evaluations = 0;
};

/// Maximizes single-comb echo efficiency over finesse and peak optical depth
/// at fixed tooth spacing. Uses a grid fine enough for finesse_max.
OptimizationResult optimize_efficiency(ToothShape shape, double tooth_spacing,
                                       const OptimizeOptions& options = {});

/// Grid used by optimize_efficiency for a given spacing and options.
SpectralGrid probe_grid(double tooth_spacing, const OptimizeOptions& options);

} // namespace afc
