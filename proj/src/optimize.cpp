#include "afcmem/optimize.hpp"

#include "afcmem/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace afc {

GoldenResult golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                     double tolerance, int max_iterations)
{
    if (hi < lo)
        std::swap(lo, hi);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = f(c);
    double fd = f(d);
    int it = 0;
    while (hi - lo > tolerance) {
        if (++it > max_iterations)
            throw ConvergenceError("golden-section search did not converge in " +
                                   std::to_string(max_iterations) + " iterations");
        if (fc >= fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    return fc >= fd ? GoldenResult{c, fc, it} : GoldenResult{d, fd, it};
}

GoldenResult scan_then_golden(const std::function<double(double)>& f, double lo, double hi,
                              int scan_points, double tolerance, int max_iterations)
{
    if (hi <= lo)
        return {lo, f(lo), 0};
    scan_points = std::max(scan_points, 3);
    const double step = (hi - lo) / (scan_points - 1);
    int best = 0;
    double best_value = -1e300;
    for (int i = 0; i < scan_points; ++i) {
        const double v = f(lo + i * step);
        if (v > best_value) {
            best_value = v;
            best = i;
        }
    }
    const double a = lo + std::max(best - 1, 0) * step;
    const double b = lo + std::min(best + 1, scan_points - 1) * step;
    auto refined = golden_section_maximize(f, a, b, tolerance, max_iterations);
    // Bracket endpoints are never evaluated by the golden search.
    if (best_value > refined.value)
        return {lo + best * step, best_value, refined.iterations};
    return refined;
}

EchoResult single_afc_echo(const CombSpec& spec, const SpectralGrid& grid, double pulse_fwhm,
                           double window)
{
    const auto h = to_transfer_function(build_absorption(spec, grid));
    const auto input = gaussian_pulse(grid, pulse_fwhm);
    const auto output = propagate(input, h);
    return extract_echo(input, output, 1.0 / spec.tooth_spacing, window);
}

SpectralGrid probe_grid(double tooth_spacing, const OptimizeOptions& options)
{
    const double bandwidth = options.teeth_in_band * tooth_spacing;
    const double span = 4.0 * bandwidth;
    const double finest = tooth_spacing / options.finesse_max / options.samples_per_tooth;
    const auto n = std::bit_ceil(static_cast<std::size_t>(std::ceil(span / finest)));
    return SpectralGrid(span, n);
}

OptimizationResult optimize_efficiency(ToothShape shape, double tooth_spacing,
                                       const OptimizeOptions& options)
{
    if (!(options.finesse_min > 1.0 && options.finesse_max >= options.finesse_min))
        throw ValidationError("finesse search range must satisfy 1 < min <= max");
    if (!(options.effective_depth_min >= 0.0 &&
          options.effective_depth_max >= options.effective_depth_min))
        throw ValidationError("depth search range must satisfy 0 <= min <= max");

    const SpectralGrid grid = probe_grid(tooth_spacing, options);
    CombSpec spec;
    spec.tooth_spacing = tooth_spacing;
    spec.bandwidth = options.teeth_in_band * tooth_spacing;
    spec.tooth_shape = shape;
    spec.background_optical_depth = options.background_depth;
    const double pulse_fwhm = options.probe_fraction * spec.bandwidth;
    const double window = options.window > 0.0 ? options.window : 0.5 / tooth_spacing;

    OptimizationResult best;
    auto efficiency_at = [&](double finesse, double effective_depth) {
        spec.tooth_width = tooth_spacing / finesse;
        spec.peak_optical_depth = effective_depth * finesse;
        ++best.evaluations;
        return single_afc_echo(spec, grid, pulse_fwhm, window).echo_efficiency;
    };

    auto best_depth_for = [&](double finesse) {
        return scan_then_golden([&](double dt) { return efficiency_at(finesse, dt); },
                                options.effective_depth_min, options.effective_depth_max, 9,
                                options.tolerance, options.max_iterations);
    };

    const auto outer = scan_then_golden(
        [&](double finesse) { return best_depth_for(finesse).value; }, options.finesse_min,
        options.finesse_max, 7, options.tolerance * options.finesse_max, options.max_iterations);

    const auto inner = best_depth_for(outer.x);
    best.finesse = outer.x;
    best.peak_depth = inner.x * outer.x;
    best.efficiency = inner.value;
    return best;
}

} // namespace afc
