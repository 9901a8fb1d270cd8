#include "afcmem/montecarlo.hpp"

#include "afcmem/errors.hpp"
#include "afcmem/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

namespace afc {

namespace {

// Substream ids of the per-pulse Philox counters.
enum Stream : std::uint32_t {
    kPulse = 0,        // pair count, Si dark count
    kPhoton = 1,       // per pair: Si detection, idler survival
    kSiJitter = 2,
    kSiDark = 3,
    kGateIdler = 4,    // per gate: idler detection
    kGateJitter = 5,
    kGateDark = 6,
};

constexpr double kPsPerSecond = 1e12;
constexpr double kFwhmToSigma = 0.42466090014400953; // 1 / (2 sqrt(2 ln 2))

std::int64_t to_ps(double seconds) { return std::llround(seconds * kPsPerSecond); }

std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

double db_to_transmission(double db) { return std::pow(10.0, -db / 10.0); }

/// Cumulative table of a discrete distribution truncated once the tail is negligible.
template <typename Pmf>
std::vector<double> cumulative(Pmf&& pmf)
{
    std::vector<double> cdf;
    double acc = 0.0;
    for (int n = 0; n < 64; ++n) {
        acc += pmf(n);
        cdf.push_back(acc);
        if (1.0 - acc < 1e-16)
            break;
    }
    return cdf;
}

std::vector<double> poisson_cdf(double mean)
{
    return cumulative([mean](int n) { return std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0)); });
}

std::vector<double> thermal_cdf(double mean)
{
    return cumulative([mean](int n) { return std::pow(mean / (1.0 + mean), n) / (1.0 + mean); });
}

int sample_count(const std::vector<double>& cdf, double u)
{
    int n = 0;
    while (n < static_cast<int>(cdf.size()) && u >= cdf[n])
        ++n;
    return n;
}

std::uint64_t gate_stream_id(std::int64_t cycle, std::int64_t index)
{
    return (static_cast<std::uint64_t>(cycle) << 32) ^ static_cast<std::uint32_t>(index);
}

struct RunConstants {
    Frame frame;
    std::vector<double> pair_cdf;
    std::vector<double> si_dark_cdf;
    double signal_detection = 0.0; // channel x Si efficiency
    double emission_total = 0.0;
    double idler_survival = 0.0;
    double ingaas_efficiency = 0.0;
    double ingaas_dark = 0.0;
    double si_sigma_ps = 0.0;
    double ingaas_sigma_ps = 0.0;
    std::int64_t si_dead_ps = 0;
    std::int64_t ingaas_dead_ps = 0;
    std::int64_t duration_ps = 0;
};

std::vector<Event> simulate_cycle(std::int64_t cycle, const RunConstants& rc,
                                  const EmissionProfile& emission, const PulseStreams& streams)
{
    const Frame& fr = rc.frame;
    const std::int64_t slots = fr.slots_per_cycle();

    std::vector<std::int64_t> si_times;
    std::vector<std::pair<std::int64_t, int>> idlers; // (slot, surviving idlers), ascending

    for (std::int64_t i = 0; i < slots; ++i) {
        const std::int64_t t_pump = fr.pump_time(cycle, i);
        if (t_pump >= rc.duration_ps)
            break;
        const auto pulse = static_cast<std::uint64_t>(cycle * slots + i);
        const auto u = streams.uniforms(pulse, kPulse, 0);
        const int pairs = sample_count(rc.pair_cdf, u.first);
        const int darks = sample_count(rc.si_dark_cdf, u.second);

        int surviving_idlers = 0;
        for (int j = 0; j < pairs; ++j) {
            const auto v = streams.uniforms(pulse, kPhoton, static_cast<std::uint32_t>(j));
            if (v.first < rc.signal_detection * rc.emission_total) {
                const std::int64_t t = emission.sample(v.first / rc.signal_detection);
                const double jitter = rc.si_sigma_ps * streams.normal(pulse, kSiJitter, static_cast<std::uint32_t>(j));
                si_times.push_back(t_pump + t + std::llround(jitter));
            }
            if (v.second < rc.idler_survival)
                ++surviving_idlers;
        }
        if (surviving_idlers > 0)
            idlers.emplace_back(i, surviving_idlers);

        for (int d = 0; d < darks; ++d) {
            const auto w = streams.uniforms(pulse, kSiDark, static_cast<std::uint32_t>(d));
            si_times.push_back(t_pump - fr.offset_ps +
                               static_cast<std::int64_t>(w.first * static_cast<double>(fr.period_ps)));
        }
    }

    std::sort(si_times.begin(), si_times.end());

    std::vector<Event> si_events;
    std::vector<Event> ingaas_events;
    std::int64_t si_ready = std::numeric_limits<std::int64_t>::min();
    std::int64_t ingaas_ready = std::numeric_limits<std::int64_t>::min();
    std::int64_t last_cycle = std::numeric_limits<std::int64_t>::min();
    std::int64_t last_index = std::numeric_limits<std::int64_t>::min();
    bool last_open = false;

    for (const std::int64_t t : si_times) {
        if (t < si_ready)
            continue;
        si_ready = t + rc.si_dead_ps;

        const auto slot = fr.slot_of(t);
        if (slot.cycle == last_cycle && slot.index == last_index) {
            si_events.push_back({DetectorId::si, t, last_open});
            continue;
        }
        last_cycle = slot.cycle;
        last_index = slot.index;

        const auto [gate_begin, gate_end] = fr.gate_of(t);
        last_open = gate_begin >= ingaas_ready;
        si_events.push_back({DetectorId::si, t, last_open});
        if (!last_open)
            continue;

        int n_idlers = 0;
        if (slot.cycle == cycle) {
            auto it = std::lower_bound(idlers.begin(), idlers.end(), std::make_pair(slot.index, 0));
            if (it != idlers.end() && it->first == slot.index)
                n_idlers = it->second;
        }
        const std::uint64_t gid = gate_stream_id(slot.cycle, slot.index);
        const std::int64_t center = gate_begin + fr.gate_width_ps / 2;
        std::int64_t first = std::numeric_limits<std::int64_t>::max();
        for (int m = 0; m < n_idlers; ++m) {
            const auto g = streams.uniforms(gid, kGateIdler, static_cast<std::uint32_t>(m));
            if (g.first >= rc.ingaas_efficiency)
                continue;
            const std::int64_t ti =
                center + std::llround(rc.ingaas_sigma_ps * streams.normal(gid, kGateJitter, static_cast<std::uint32_t>(m)));
            if (ti >= gate_begin && ti < gate_end)
                first = std::min(first, ti);
        }
        const auto g = streams.uniforms(gid, kGateDark, 0);
        if (g.first < rc.ingaas_dark)
            first = std::min(first, gate_begin + static_cast<std::int64_t>(
                                                     g.second * static_cast<double>(gate_end - gate_begin)));
        if (first != std::numeric_limits<std::int64_t>::max()) {
            ingaas_events.push_back({DetectorId::ingaas, first, true});
            ingaas_ready = first + rc.ingaas_dead_ps;
        }
    }

    std::vector<Event> merged;
    merged.reserve(si_events.size() + ingaas_events.size());
    std::merge(si_events.begin(), si_events.end(), ingaas_events.begin(), ingaas_events.end(),
               std::back_inserter(merged), [](const Event& a, const Event& b) {
                   return a.time_ps < b.time_ps ||
                          (a.time_ps == b.time_ps && a.detector < b.detector);
               });
    return merged;
}

} // namespace

PairStatistics parse_pair_statistics(std::string_view name)
{
    if (name == "poisson")
        return PairStatistics::poisson;
    if (name == "thermal")
        return PairStatistics::thermal;
    throw ValidationError("unknown pair statistics '" + std::string(name) + "' (expected poisson or thermal)");
}

std::string_view to_string(PairStatistics stats)
{
    return stats == PairStatistics::poisson ? "poisson" : "thermal";
}

void SourceModel::validate() const
{
    if (!(rep_rate > 0.0 && std::isfinite(rep_rate)))
        throw ValidationError("source repetition rate must be positive");
    if (!(mean_photon >= 0.0 && mean_photon < 1.0))
        throw ValidationError("mean photon number per qubit must lie in [0, 1)");
    if (!(pair_correlation >= 0.0 && pair_correlation <= 1.0))
        throw ValidationError("pair correlation must lie in [0, 1]");
}

void DetectorModel::validate() const
{
    if (!(efficiency >= 0.0 && efficiency <= 1.0))
        throw ValidationError("detector efficiency must lie in [0, 1]");
    if (!(dark_count_rate >= 0.0 && std::isfinite(dark_count_rate)))
        throw ValidationError("detector dark count rate must be non-negative");
    if (!(dead_time >= 0.0 && std::isfinite(dead_time)))
        throw ValidationError("detector dead time must be non-negative");
    if (!(jitter_fwhm >= 0.0 && std::isfinite(jitter_fwhm)))
        throw ValidationError("detector jitter must be non-negative");
    if (gated && !(gate_width > 0.0))
        throw ValidationError("gated detector needs a positive gate width");
}

double DetectorModel::dark_probability_per_gate() const
{
    return -std::expm1(-dark_count_rate * gate_width);
}

void ChannelModel::validate() const
{
    if (!(signal_loss_db >= 0.0) || !(idler_loss_db >= 0.0))
        throw ValidationError("channel loss must be non-negative");
    if (!(idler_delay >= 0.0))
        throw ValidationError("idler delay must be non-negative");
}

void TimingSequence::validate() const
{
    if (!(prep > 0.0 && wait > 0.0 && storage > 0.0))
        throw ValidationError("timing sequence phases must all be positive");
}

void MonteCarloConfig::validate() const
{
    source.validate();
    si.validate();
    ingaas.validate();
    channel.validate();
    timing.validate();
    if (!ingaas.gated)
        throw ValidationError("the InGaAs detector must be gated");
    if (!(frame_offset >= 0.0 && frame_offset < 1.0 / source.rep_rate))
        throw ValidationError("frame offset must lie within one pump period");
    if (ingaas.gate_width >= 1.0 / source.rep_rate)
        throw ValidationError("InGaAs gate must be shorter than the pump period");
}

Frame Frame::from(const MonteCarloConfig& config)
{
    Frame f;
    f.period_ps = std::llround(kPsPerSecond / config.source.rep_rate);
    f.cycle_ps = to_ps(config.timing.cycle());
    f.storage_start_ps = to_ps(config.timing.prep + config.timing.wait);
    f.storage_ps = to_ps(config.timing.storage);
    f.offset_ps = to_ps(config.frame_offset);
    f.gate_delay_ps = to_ps(config.channel.idler_delay);
    f.gate_width_ps = to_ps(config.ingaas.gate_width);
    return f;
}

Frame::Slot Frame::slot_of(std::int64_t t_ps) const
{
    const std::int64_t cycle = floor_div(t_ps, cycle_ps);
    const std::int64_t within = t_ps - cycle * cycle_ps - storage_start_ps;
    const std::int64_t index = floor_div(within + offset_ps, period_ps);
    return {cycle, index, within - index * period_ps};
}

std::int64_t Frame::pump_time(std::int64_t cycle, std::int64_t index) const
{
    return cycle * cycle_ps + storage_start_ps + index * period_ps;
}

std::pair<std::int64_t, std::int64_t> Frame::gate_of(std::int64_t t_ps) const
{
    const auto s = slot_of(t_ps);
    const std::int64_t begin = pump_time(s.cycle, s.index) + gate_delay_ps - gate_width_ps / 2;
    return {begin, begin + gate_width_ps};
}

EmissionProfile::EmissionProfile(const Wavepacket& output, double input_energy, double t_min,
                                 double t_max)
{
    if (!(input_energy > 0.0))
        throw ValidationError("emission profile needs a positive input energy");
    const double dt = output.grid.time_step();
    double acc = 0.0;
    for (std::size_t k = 0; k < output.grid.size(); ++k) {
        const double t = output.grid.time(k);
        if (t < t_min || t > t_max)
            continue;
        acc += std::norm(output.amplitude[k]) * dt / input_energy;
        times_.push_back(to_ps(t));
        cdf_.push_back(acc);
    }
}

EmissionProfile::EmissionProfile(std::vector<std::int64_t> times_ps, std::vector<double> probabilities)
    : times_(std::move(times_ps))
{
    if (times_.size() != probabilities.size())
        throw ValidationError("emission profile: times and probabilities differ in length");
    double acc = 0.0;
    for (double p : probabilities) {
        if (!(p >= 0.0))
            throw ValidationError("emission probabilities must be non-negative");
        acc += p;
        cdf_.push_back(acc);
    }
    if (acc > 1.0 + 1e-12)
        throw ValidationError("emission probabilities sum above one");
}

std::int64_t EmissionProfile::sample(double u) const
{
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end())
        --it;
    return times_[static_cast<std::size_t>(it - cdf_.begin())];
}

double EmissionProfile::mass(std::int64_t lo_ps, std::int64_t hi_ps) const
{
    double m = 0.0;
    for (std::size_t i = 0; i < times_.size(); ++i)
        if (times_[i] >= lo_ps && times_[i] < hi_ps)
            m += cdf_[i] - (i > 0 ? cdf_[i - 1] : 0.0);
    return m;
}

EmissionProfile emission_for(const MemoryModel& memory, const TimeBinQubit& qubit,
                             const std::optional<ProjectionSetting>& setting, double frame_offset)
{
    const auto in = encode(qubit, gaussian_pulse(memory.grid, memory.pulse_fwhm));
    TransferFunction h = setting ? make_double_afc(*setting, memory.comb, memory.grid)
                                 : to_transfer_function(build_absorption(memory.comb, memory.grid));
    const auto out = propagate(in, h);
    // Echo trains beyond a few recall periods carry negligible energy.
    const double recall = setting ? setting->recall_time_2 : 1.0 / memory.comb.tooth_spacing;
    const double horizon = std::min(8.0 * recall, 0.5 * memory.grid.time_span());
    return EmissionProfile(out, energy(in), -frame_offset, horizon);
}

EventLog simulate_run(const MonteCarloConfig& config, const EmissionProfile& emission,
                      double duration, std::uint64_t seed, unsigned threads,
                      const std::string& config_digest)
{
    config.validate();
    if (!(duration >= config.timing.cycle()))
        throw ValidationError("run duration must cover at least one full timing cycle");
    if (emission.total() > 1.0 + 1e-9)
        throw ValidationError("emission probabilities sum above one");

    RunConstants rc;
    rc.frame = Frame::from(config);
    rc.duration_ps = to_ps(duration);
    rc.pair_cdf = config.source.mean_photon > 0.0
                      ? (config.source.statistics == PairStatistics::poisson
                             ? poisson_cdf(config.source.mean_photon)
                             : thermal_cdf(config.source.mean_photon))
                      : std::vector<double>{1.0};
    const double lambda = config.si.dark_count_rate / config.source.rep_rate;
    rc.si_dark_cdf = lambda > 0.0 ? poisson_cdf(lambda) : std::vector<double>{1.0};
    rc.signal_detection = db_to_transmission(config.channel.signal_loss_db) * config.si.efficiency;
    rc.emission_total = emission.total();
    rc.idler_survival = config.source.pair_correlation * db_to_transmission(config.channel.idler_loss_db);
    rc.ingaas_efficiency = config.ingaas.efficiency;
    rc.ingaas_dark = config.ingaas.dark_probability_per_gate();
    rc.si_sigma_ps = config.si.jitter_fwhm * kFwhmToSigma * kPsPerSecond;
    rc.ingaas_sigma_ps = config.ingaas.jitter_fwhm * kFwhmToSigma * kPsPerSecond;
    rc.si_dead_ps = to_ps(config.si.dead_time);
    rc.ingaas_dead_ps = to_ps(config.ingaas.dead_time);

    const Frame& fr = rc.frame;
    const std::int64_t n_cycles = floor_div(rc.duration_ps - fr.storage_start_ps - 1, fr.cycle_ps) + 1;
    const PulseStreams streams(seed);

    std::vector<std::vector<Event>> per_cycle(static_cast<std::size_t>(std::max<std::int64_t>(n_cycles, 0)));
    std::atomic<std::int64_t> next{0};
    auto worker = [&] {
        for (std::int64_t c = next++; c < n_cycles; c = next++)
            per_cycle[static_cast<std::size_t>(c)] = simulate_cycle(c, rc, emission, streams);
    };
    threads = std::max(1u, threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < threads; ++i)
            pool.emplace_back(worker);
    }

    EventLog log;
    log.meta = {seed, duration, config_digest, fr, 0};
    for (std::int64_t c = 0; c < n_cycles; ++c) {
        const std::int64_t first = fr.pump_time(c, 0);
        const std::int64_t in_cycle = std::min(fr.slots_per_cycle(),
                                               std::max<std::int64_t>(0, floor_div(rc.duration_ps - first - 1, fr.period_ps) + 1));
        log.meta.pump_pulses += static_cast<std::uint64_t>(in_cycle);
    }
    std::size_t total = 0;
    for (const auto& v : per_cycle)
        total += v.size();
    log.events.reserve(total);
    for (auto& v : per_cycle)
        log.events.insert(log.events.end(), v.begin(), v.end());
    return log;
}

EventLog simulate_run(const MonteCarloConfig& config, const MemoryModel& memory,
                      const TimeBinQubit& qubit, const std::optional<ProjectionSetting>& setting,
                      double duration, std::uint64_t seed, unsigned threads,
                      const std::string& config_digest)
{
    const auto emission = emission_for(memory, qubit, setting, config.frame_offset);
    return simulate_run(config, emission, duration, seed, threads, config_digest);
}

void check_log(const EventLog& log, const MonteCarloConfig& config)
{
    const std::int64_t dead[2] = {to_ps(config.si.dead_time), to_ps(config.ingaas.dead_time)};
    std::int64_t last[2] = {std::numeric_limits<std::int64_t>::min(), std::numeric_limits<std::int64_t>::min()};
    for (const auto& e : log.events) {
        const auto d = static_cast<std::size_t>(e.detector);
        if (last[d] != std::numeric_limits<std::int64_t>::min()) {
            if (e.time_ps < last[d])
                throw ValidationError("event log times decrease");
            if (e.time_ps - last[d] < dead[d])
                throw ValidationError("event log violates detector dead time");
        }
        last[d] = e.time_ps;
    }
}

void write_event_log(std::ostream& os, const EventLog& log)
{
    const auto& m = log.meta;
    const auto& f = m.frame;
    std::ostringstream duration;
    duration.precision(17);
    duration << m.duration;
    os << "# afcmem event log v1\n"
       << "# seed " << m.seed << '\n'
       << "# duration_s " << duration.str() << '\n'
       << "# config_digest " << (m.config_digest.empty() ? "-" : m.config_digest) << '\n'
       << "# pump_pulses " << m.pump_pulses << '\n'
       << "# frame " << f.period_ps << ' ' << f.cycle_ps << ' ' << f.storage_start_ps << ' '
       << f.storage_ps << ' ' << f.offset_ps << ' ' << f.gate_delay_ps << ' ' << f.gate_width_ps << '\n'
       << "# detector\ttime_ps\tgate\n";
    for (const auto& e : log.events)
        os << static_cast<int>(e.detector) << '\t' << e.time_ps << '\t' << (e.gate ? 1 : 0) << '\n';
}

EventLog read_event_log(std::istream& is)
{
    EventLog log;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::istringstream ls(line);
        if (line[0] == '#') {
            std::string hash, key;
            ls >> hash >> key;
            auto& m = log.meta;
            if (key == "seed")
                ls >> m.seed;
            else if (key == "duration_s")
                ls >> m.duration;
            else if (key == "config_digest")
                ls >> m.config_digest;
            else if (key == "pump_pulses")
                ls >> m.pump_pulses;
            else if (key == "frame")
                ls >> m.frame.period_ps >> m.frame.cycle_ps >> m.frame.storage_start_ps >> m.frame.storage_ps >>
                    m.frame.offset_ps >> m.frame.gate_delay_ps >> m.frame.gate_width_ps;
            continue;
        }
        int det = 0, gate = 0;
        std::int64_t t = 0;
        if (!(ls >> det >> t >> gate) || (det != 0 && det != 1))
            throw ValidationError("malformed event log line: " + line);
        log.events.push_back({static_cast<DetectorId>(det), t, gate != 0});
    }
    if (log.meta.config_digest == "-")
        log.meta.config_digest.clear();
    return log;
}

} // namespace afc
