#include "afcmem/spectral.hpp"

#include "afcmem/errors.hpp"
#include "afcmem/fft.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

namespace afc {

namespace {

// Raised-cosine roll-off occupies this fraction of the bandwidth (split
// evenly between both band edges).
constexpr double kApodizationFraction = 0.05;

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

// Square teeth are sampled by cell coverage: the fraction of the sample cell
// [x - dx/2, x + dx/2] inside the tooth. Point sampling makes the tooth area
// jump with grid alignment.
double square_coverage(double detuning, double fwhm, double cell)
{
    const double lo = std::max(detuning - 0.5 * cell, -0.5 * fwhm);
    const double hi = std::min(detuning + 0.5 * cell, 0.5 * fwhm);
    return hi > lo ? (hi - lo) / cell : 0.0;
}

double sampled_lineshape(ToothShape shape, double detuning, double fwhm, double cell)
{
    if (shape == ToothShape::square)
        return square_coverage(detuning, fwhm, cell);
    return tooth_lineshape(shape, detuning, fwhm);
}

double apodization(double offset, double bandwidth)
{
    const double half = 0.5 * bandwidth;
    const double ramp = 0.5 * kApodizationFraction * bandwidth;
    const double a = std::abs(offset);
    if (a >= half)
        return 0.0;
    if (a <= half - ramp)
        return 1.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * (a - (half - ramp)) / ramp));
}

} // namespace

ToothShape parse_tooth_shape(std::string_view name)
{
    if (name == "gaussian")
        return ToothShape::gaussian;
    if (name == "lorentzian")
        return ToothShape::lorentzian;
    if (name == "square")
        return ToothShape::square;
    throw ValidationError("unknown tooth shape '" + std::string(name) +
                          "' (expected gaussian, lorentzian or square)");
}

std::string_view to_string(ToothShape shape)
{
    switch (shape) {
    case ToothShape::gaussian: return "gaussian";
    case ToothShape::lorentzian: return "lorentzian";
    case ToothShape::square: return "square";
    }
    return "unknown";
}

void CombSpec::validate() const
{
    if (!std::isfinite(center_offset))
        throw ValidationError("comb center offset must be finite");
    if (!finite_nonneg(bandwidth) || !finite_nonneg(tooth_spacing) || !finite_nonneg(tooth_width))
        throw ValidationError("comb frequencies must be finite and non-negative");
    if (tooth_spacing <= 0.0 || tooth_width <= 0.0)
        throw ValidationError("comb tooth spacing and width must be positive");
    if (!finite_nonneg(peak_optical_depth) || !finite_nonneg(background_optical_depth))
        throw ValidationError("comb optical depths must be finite and non-negative");
    if (tooth_width >= tooth_spacing)
        throw ValidationError("comb finesse must exceed 1 (tooth width < tooth spacing)");
    if (bandwidth < 2.0 * tooth_spacing)
        throw ValidationError("comb bandwidth must cover at least two tooth spacings");
    if (!(amplitude_weight >= 0.0 && amplitude_weight <= 1.0))
        throw ValidationError("comb amplitude weight must lie in [0, 1]");
}

SpectralGrid::SpectralGrid(double span, std::size_t n_points) : span_(span), n_(n_points)
{
    if (!(std::isfinite(span) && span > 0.0))
        throw ValidationError("grid span must be positive and finite");
    if (n_points < 2 || !std::has_single_bit(n_points))
        throw ValidationError("grid point count must be a power of two >= 2");
}

double SpectralGrid::frequency(std::size_t k) const
{
    return (static_cast<double>(k) - static_cast<double>(n_ / 2)) * resolution();
}

double SpectralGrid::time(std::size_t k) const
{
    return (static_cast<double>(k) - static_cast<double>(n_ / 2)) * time_step();
}

std::size_t SpectralGrid::time_index(double t) const
{
    const double idx = std::round(t / time_step()) + static_cast<double>(n_ / 2);
    return static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(n_ - 1)));
}

void SpectralGrid::check_resolves(const CombSpec& spec) const
{
    if (resolution() > spec.tooth_width / 8.0)
        throw ValidationError("grid too coarse: resolution " + std::to_string(resolution()) +
                              " Hz exceeds tooth width / 8");
    if (span_ < 4.0 * spec.bandwidth)
        throw ValidationError("grid span must be at least 4x the comb bandwidth");
}

std::vector<double> tooth_centers(const CombSpec& spec)
{
    std::vector<double> centers;
    const double half = 0.5 * spec.bandwidth;
    const auto m_max = static_cast<long>(std::ceil(half / spec.tooth_spacing));
    for (long m = -m_max; m <= m_max; ++m) {
        const double offset = static_cast<double>(m) * spec.tooth_spacing;
        if (std::abs(offset) < half)
            centers.push_back(spec.center_offset + offset);
    }
    return centers;
}

double tooth_lineshape(ToothShape shape, double detuning, double fwhm)
{
    const double u = detuning / fwhm;
    switch (shape) {
    case ToothShape::gaussian: return std::exp(-4.0 * std::numbers::ln2 * u * u);
    case ToothShape::lorentzian: return 1.0 / (1.0 + 4.0 * u * u);
    case ToothShape::square: return std::abs(u) <= 0.5 ? 1.0 : 0.0;
    }
    return 0.0;
}

AbsorptionProfile build_absorption(const CombSpec& spec, const SpectralGrid& grid)
{
    spec.validate();
    grid.check_resolves(spec);

    const double half = 0.5 * spec.bandwidth;
    AbsorptionProfile out{grid, std::vector<double>(grid.size(), 0.0)};
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double x = grid.frequency(k) - spec.center_offset;
        const double w = apodization(x, spec.bandwidth);
        if (w == 0.0)
            continue;
        // Each tooth owns the half-spacing cell around its center.
        const double m = std::round(x / spec.tooth_spacing);
        double comb = 0.0;
        if (std::abs(m * spec.tooth_spacing) < half)
            comb = spec.peak_optical_depth * sampled_lineshape(spec.tooth_shape,
                                                               x - m * spec.tooth_spacing,
                                                               spec.tooth_width, grid.resolution());
        out.depth[k] = w * (comb + spec.background_optical_depth);
    }
    return out;
}

AbsorptionProfile superpose(const AbsorptionProfile& a, const AbsorptionProfile& b)
{
    if (!(a.grid == b.grid) || a.depth.size() != b.depth.size())
        throw ValidationError("superpose: profiles live on different grids");
    AbsorptionProfile out{a.grid, a.depth};
    for (std::size_t k = 0; k < out.depth.size(); ++k)
        out.depth[k] += b.depth[k];
    return out;
}

AbsorptionProfile superpose(const CombSpec& a, const CombSpec& b, const SpectralGrid& grid)
{
    auto pa = build_absorption(a, grid);
    auto pb = build_absorption(b, grid);
    for (auto& v : pa.depth)
        v *= a.amplitude_weight;
    for (auto& v : pb.depth)
        v *= b.amplitude_weight;
    return superpose(pa, pb);
}

std::vector<double> minimum_phase(const std::vector<double>& depth)
{
    const std::size_t n = depth.size();
    std::vector<std::complex<double>> log_mag(n);
    for (std::size_t k = 0; k < n; ++k)
        log_mag[k] = -0.5 * depth[k];
    auto cep = fft::ifftshift<std::complex<double>>(log_mag);
    fft::inverse(cep);

    // Fold the real cepstrum onto non-negative quefrencies.
    const std::size_t h = n / 2;
    for (std::size_t i = 1; i < h; ++i)
        cep[i] *= 2.0;
    for (std::size_t i = h + 1; i < n; ++i)
        cep[i] = 0.0;
    fft::forward(cep);

    std::vector<double> phase_fft(n);
    for (std::size_t i = 0; i < n; ++i)
        phase_fft[i] = -cep[i].imag();
    return fft::fftshift<double>(phase_fft);
}

TransferFunction to_transfer_function(const AbsorptionProfile& profile)
{
    for (double v : profile.depth)
        if (!finite_nonneg(v))
            throw ValidationError("absorption profile must be finite and non-negative");
    const auto phase = minimum_phase(profile.depth);
    TransferFunction h{profile.grid, std::vector<std::complex<double>>(profile.depth.size())};
    for (std::size_t k = 0; k < h.values.size(); ++k)
        h.values[k] = std::polar(std::exp(-0.5 * profile.depth[k]), -phase[k]);
    return h;
}

} // namespace afc
