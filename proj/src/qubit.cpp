#include "afcmem/qubit.hpp"

#include "afcmem/errors.hpp"

#include <cmath>
#include <numbers>

namespace afc {

namespace {

constexpr double kNormTolerance = 1e-12;

Wavepacket input_light(const MemoryModel& model, const TimeBinQubit& qubit)
{
    return encode(qubit, gaussian_pulse(model.grid, model.pulse_fwhm));
}

} // namespace

void TimeBinQubit::validate() const
{
    if (std::abs(std::norm(early) + std::norm(late) - 1.0) > kNormTolerance)
        throw ValidationError("time-bin qubit amplitudes must be normalized");
    if (!(bin_separation > 0.0))
        throw ValidationError("time-bin separation must be positive");
}

double TimeBinQubit::phase() const
{
    if (std::abs(early) == 0.0 || std::abs(late) == 0.0)
        return 0.0;
    return std::arg(late) - std::arg(early);
}

TimeBinQubit TimeBinQubit::early_state(double tau) { return {{1.0, 0.0}, {0.0, 0.0}, tau}; }

TimeBinQubit TimeBinQubit::late_state(double tau) { return {{0.0, 0.0}, {1.0, 0.0}, tau}; }

TimeBinQubit TimeBinQubit::superposition(double phi, double tau)
{
    const double s = 1.0 / std::numbers::sqrt2;
    return {{s, 0.0}, std::polar(s, phi), tau};
}

void ProjectionSetting::validate(double tau, double tolerance) const
{
    if (!(recall_time_1 > 0.0))
        throw ValidationError("first recall time must be positive");
    if (!(recall_time_2 > recall_time_1))
        throw ValidationError("second recall time must exceed the first");
    if (!(amplitude_balance >= 0.0 && amplitude_balance <= 1.0))
        throw ValidationError("amplitude balance must lie in [0, 1]");
    if (std::abs((recall_time_2 - recall_time_1) - tau) > tolerance)
        throw ValidationError("recall times must differ by the time-bin separation (t2 - t1 = tau)");
}

Wavepacket encode(const TimeBinQubit& qubit, const Wavepacket& mode_shape)
{
    qubit.validate();
    if (rms_duration(mode_shape) >= 0.5 * qubit.bin_separation)
        throw ValidationError("mode shape too long: early and late bins would overlap");
    const auto late = delayed(mode_shape, qubit.bin_separation);
    Wavepacket out{mode_shape.grid, mode_shape.amplitude, mode_shape.carrier_offset};
    for (std::size_t k = 0; k < out.amplitude.size(); ++k)
        out.amplitude[k] = qubit.early * mode_shape.amplitude[k] + qubit.late * late.amplitude[k];
    return out;
}

std::pair<CombSpec, CombSpec> double_afc_combs(const ProjectionSetting& setting, const CombSpec& base)
{
    const double finesse = base.finesse();
    CombSpec first = base;
    first.tooth_spacing = 1.0 / setting.recall_time_1;
    first.tooth_width = first.tooth_spacing / finesse;
    first.amplitude_weight = setting.amplitude_balance;

    CombSpec second = base;
    second.tooth_spacing = 1.0 / setting.recall_time_2;
    second.tooth_width = second.tooth_spacing / finesse;
    second.amplitude_weight = 1.0 - setting.amplitude_balance;
    // A shift delta of the second comb multiplies its t2 echo by exp(i 2 pi delta t2).
    const double turns = setting.analyzer_phase / (2.0 * std::numbers::pi);
    second.center_offset = base.center_offset + (turns - std::floor(turns)) / setting.recall_time_2;
    return {first, second};
}

TransferFunction make_double_afc(const ProjectionSetting& setting, const CombSpec& base,
                                 const SpectralGrid& grid)
{
    const auto [first, second] = double_afc_combs(setting, base);
    const double reach = setting.recall_time_2 + (setting.recall_time_2 - setting.recall_time_1);
    if (grid.time_span() * 0.5 <= 2.0 * reach)
        throw ValidationError("recall times not reachable: time grid shorter than the analyzer output");
    grid.check_resolves(first);
    grid.check_resolves(second);
    return to_transfer_function(superpose(first, second, grid));
}

Wavepacket retrieve(const MemoryModel& model, const TimeBinQubit& qubit)
{
    const auto h = to_transfer_function(build_absorption(model.comb, model.grid));
    return propagate(input_light(model, qubit), h);
}

Wavepacket retrieve(const MemoryModel& model, const TimeBinQubit& qubit,
                    const ProjectionSetting& setting)
{
    setting.validate(qubit.bin_separation, model.grid.time_step());
    const auto h = make_double_afc(setting, model.comb, model.grid);
    return propagate(input_light(model, qubit), h);
}

ProjectionWindows project(const MemoryModel& model, const TimeBinQubit& qubit,
                          const ProjectionSetting& setting)
{
    if (model.window > qubit.bin_separation)
        throw ValidationError("detection windows overlap: window wider than the bin separation");
    setting.validate(qubit.bin_separation, model.grid.time_step());
    const auto in = input_light(model, qubit);
    const auto out = propagate(in, make_double_afc(setting, model.comb, model.grid));
    const double e_in = energy(in);
    const double t1 = setting.recall_time_1;
    const double t2 = setting.recall_time_2;
    const double tau = qubit.bin_separation;
    return {window_energy(out, t1, model.window) / e_in,
            window_energy(out, t2, model.window) / e_in,
            window_energy(out, t2 + tau, model.window) / e_in};
}

StorageWindows store(const MemoryModel& model, const TimeBinQubit& qubit)
{
    if (model.window > qubit.bin_separation)
        throw ValidationError("detection windows overlap: window wider than the bin separation");
    const auto in = input_light(model, qubit);
    const auto out = propagate(in, to_transfer_function(build_absorption(model.comb, model.grid)));
    const double e_in = energy(in);
    const double t = 1.0 / model.comb.tooth_spacing;
    return {window_energy(out, t, model.window) / e_in,
            window_energy(out, t + qubit.bin_separation, model.window) / e_in};
}

} // namespace afc
