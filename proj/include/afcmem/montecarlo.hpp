#pragma once

#include "afcmem/propagation.hpp"
#include "afcmem/qubit.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace afc {

enum class PairStatistics { poisson, thermal };

PairStatistics parse_pair_statistics(std::string_view name);
std::string_view to_string(PairStatistics stats);

/// Pulsed pair source after spectral filtering.
struct SourceModel {
    double rep_rate = 80e6;          // Hz
    double mean_photon = 0.1;        // pairs per pump pulse
    double pair_correlation = 0.8;   // P(795 nm photon has a surviving 1532 nm partner)
    PairStatistics statistics = PairStatistics::poisson;

    void validate() const;
};

struct DetectorModel {
    double efficiency = 0.6;
    double dark_count_rate = 100.0;  // Hz
    double dead_time = 0.0;          // s
    double jitter_fwhm = 0.35e-9;    // s
    bool gated = false;
    double gate_width = 0.0;         // s, only for gated detectors

    void validate() const;
    /// Probability of a dark count inside one gate.
    double dark_probability_per_gate() const;
};

struct ChannelModel {
    double signal_loss_db = 10.0;    // fibre-to-waveguide round trip
    double idler_loss_db = 0.0;
    double idler_delay = 147e-9;     // 30 m of fibre

    void validate() const;
};

struct TimingSequence {
    double prep = 10e-3;
    double wait = 2.2e-3;
    double storage = 40e-3;

    void validate() const;
    double cycle() const { return prep + wait + storage; }
};

struct MonteCarloConfig {
    SourceModel source;
    DetectorModel si{0.6, 100.0, 50e-9, 0.35e-9, false, 0.0};
    DetectorModel ingaas{0.25, 2e4, 10e-6, 0.35e-9, true, 5e-9};
    ChannelModel channel;
    TimingSequence timing;
    /// Pump-frame histograms start this long before each pump pulse.
    double frame_offset = 2e-9;

    void validate() const;
};

/// Integer-picosecond timing frame shared by the simulator and the TDC.
struct Frame {
    std::int64_t period_ps = 12500;
    std::int64_t cycle_ps = 0;
    std::int64_t storage_start_ps = 0;
    std::int64_t storage_ps = 0;
    std::int64_t offset_ps = 2000;
    std::int64_t gate_delay_ps = 0;
    std::int64_t gate_width_ps = 0;

    static Frame from(const MonteCarloConfig& config);

    std::int64_t slots_per_cycle() const { return storage_ps / period_ps; }

    struct Slot {
        std::int64_t cycle;
        std::int64_t index;      // pump slot within the storage phase (may exceed the last pulse)
        std::int64_t frame_time; // ps relative to the pump pulse, in [-offset, period - offset)
    };
    Slot slot_of(std::int64_t t_ps) const;
    std::int64_t pump_time(std::int64_t cycle, std::int64_t index) const;
    /// Half-open InGaAs gate [begin, end) triggered by a Si click at t_ps.
    std::pair<std::int64_t, std::int64_t> gate_of(std::int64_t t_ps) const;
};

enum class DetectorId : std::uint8_t { si = 0, ingaas = 1 };

struct Event {
    DetectorId detector;
    std::int64_t time_ps;
    bool gate; // Si: the click opened (or shared) an InGaAs gate and started the TDC

    bool operator==(const Event&) const = default;
};

struct RunMetadata {
    std::uint64_t seed = 0;
    double duration = 0.0;
    std::string config_digest;
    Frame frame;
    std::uint64_t pump_pulses = 0;
};

struct EventLog {
    std::vector<Event> events;
    RunMetadata meta;
};

/// Discrete distribution of the photon emission time (ps, relative to the
/// pump pulse) with total probability <= 1.
class EmissionProfile {
public:
    EmissionProfile() = default;
    /// Samples output intensity on [t_min, t_max], normalized by input energy.
    EmissionProfile(const Wavepacket& output, double input_energy, double t_min, double t_max);
    /// Point masses at the given times.
    EmissionProfile(std::vector<std::int64_t> times_ps, std::vector<double> probabilities);

    double total() const { return cdf_.empty() ? 0.0 : cdf_.back(); }
    /// u in [0, total()) -> emission time.
    std::int64_t sample(double u) const;
    /// Probability mass with t in [lo, hi).
    double mass(std::int64_t lo_ps, std::int64_t hi_ps) const;

private:
    std::vector<std::int64_t> times_;
    std::vector<double> cdf_;
};

/// Emission profile for a qubit stored in the single comb (setting empty) or
/// analyzed by the double comb.
EmissionProfile emission_for(const MemoryModel& memory, const TimeBinQubit& qubit,
                             const std::optional<ProjectionSetting>& setting,
                             double frame_offset);

/// Runs the experiment for `duration` seconds of wall time. Throws
/// ValidationError for an invalid config or a duration shorter than one
/// timing cycle. `threads` > 1 simulates timing cycles concurrently; the log
/// does not depend on it.
EventLog simulate_run(const MonteCarloConfig& config, const EmissionProfile& emission,
                      double duration, std::uint64_t seed, unsigned threads = 1,
                      const std::string& config_digest = {});

EventLog simulate_run(const MonteCarloConfig& config, const MemoryModel& memory,
                      const TimeBinQubit& qubit, const std::optional<ProjectionSetting>& setting,
                      double duration, std::uint64_t seed, unsigned threads = 1,
                      const std::string& config_digest = {});

/// Throws ValidationError if the log breaks ordering or dead-time contracts.
void check_log(const EventLog& log, const MonteCarloConfig& config);

void write_event_log(std::ostream& os, const EventLog& log);
EventLog read_event_log(std::istream& is);

// ---------------------------------------------------------------------------
// TDC histograms

enum class HistogramMode { singles, conditional };

struct TdcHistogram {
    std::int64_t origin_ps = 0;     // left edge of bin 0 (pump frame)
    std::int64_t bin_width_ps = 0;
    std::vector<std::uint64_t> counts;

    std::uint64_t total() const;
    double bin_center_ps(std::size_t i) const;
    std::size_t bin_of(std::int64_t frame_time_ps) const;
};

/// Histogram of Si click times in the pump frame. Singles: every click that
/// started the TDC. Conditional: those whose gate also holds an InGaAs click.
TdcHistogram tdc_histogram(const EventLog& log, double bin_width, HistogramMode mode);

/// Si events counted by the conditional histogram, in log order.
std::vector<std::size_t> conditional_events(const EventLog& log);

void write_histogram(std::ostream& os, const TdcHistogram& hist);

struct TimeWindow {
    double center = 0.0; // s, pump frame
    double width = 0.0;  // s
};

struct WindowCounts {
    std::vector<std::uint64_t> counts;
    std::uint64_t background_raw = 0;
    /// Background scaled to one signal-window width.
    double background = 0.0;
};

/// Counts per window (bins whose centers fall inside) and a background
/// estimate from the background windows. All windows must be disjoint.
WindowCounts window_counts(const TdcHistogram& hist, const std::vector<TimeWindow>& windows,
                           const std::vector<TimeWindow>& background);

} // namespace afc
