#include "afcmem/errors.hpp"
#include "afcmem/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace afc {

std::uint64_t TdcHistogram::total() const
{
    std::uint64_t s = 0;
    for (auto c : counts)
        s += c;
    return s;
}

double TdcHistogram::bin_center_ps(std::size_t i) const
{
    return static_cast<double>(origin_ps) + (static_cast<double>(i) + 0.5) * static_cast<double>(bin_width_ps);
}

std::size_t TdcHistogram::bin_of(std::int64_t frame_time_ps) const
{
    return static_cast<std::size_t>((frame_time_ps - origin_ps) / bin_width_ps);
}

namespace {

std::vector<std::int64_t> ingaas_times(const EventLog& log)
{
    std::vector<std::int64_t> t;
    for (const auto& e : log.events)
        if (e.detector == DetectorId::ingaas)
            t.push_back(e.time_ps);
    return t;
}

} // namespace

std::vector<std::size_t> conditional_events(const EventLog& log)
{
    const auto idlers = ingaas_times(log);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < log.events.size(); ++i) {
        const auto& e = log.events[i];
        if (e.detector != DetectorId::si || !e.gate)
            continue;
        const auto [begin, end] = log.meta.frame.gate_of(e.time_ps);
        auto it = std::lower_bound(idlers.begin(), idlers.end(), begin);
        if (it != idlers.end() && *it < end)
            out.push_back(i);
    }
    return out;
}

TdcHistogram tdc_histogram(const EventLog& log, double bin_width, HistogramMode mode)
{
    const Frame& fr = log.meta.frame;
    if (fr.period_ps <= 0 || fr.cycle_ps <= 0)
        throw ValidationError("event log carries no timing frame");
    const std::int64_t bw = std::llround(bin_width * 1e12);
    if (bw <= 0)
        throw ValidationError("histogram bin width must be at least 1 ps");

    TdcHistogram h;
    h.origin_ps = -fr.offset_ps;
    h.bin_width_ps = bw;
    h.counts.assign(static_cast<std::size_t>((fr.period_ps + bw - 1) / bw), 0);

    auto add = [&](const Event& e) { ++h.counts[h.bin_of(fr.slot_of(e.time_ps).frame_time)]; };
    if (mode == HistogramMode::singles) {
        for (const auto& e : log.events)
            if (e.detector == DetectorId::si && e.gate)
                add(e);
    } else {
        for (auto i : conditional_events(log))
            add(log.events[i]);
    }
    return h;
}

void write_histogram(std::ostream& os, const TdcHistogram& hist)
{
    os.precision(15);
    os << "# bin_center_ps\tcounts\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i)
        os << hist.bin_center_ps(i) << '\t' << hist.counts[i] << '\n';
}

WindowCounts window_counts(const TdcHistogram& hist, const std::vector<TimeWindow>& windows,
                           const std::vector<TimeWindow>& background)
{
    struct Span {
        double lo, hi;
    };
    auto span_of = [](const TimeWindow& w) {
        if (!(w.width > 0.0))
            throw ValidationError("analysis windows need a positive width");
        return Span{(w.center - 0.5 * w.width) * 1e12, (w.center + 0.5 * w.width) * 1e12};
    };
    std::vector<Span> all;
    for (const auto& w : windows)
        all.push_back(span_of(w));
    for (const auto& w : background)
        all.push_back(span_of(w));
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j)
            if (all[i].lo < all[j].hi && all[j].lo < all[i].hi)
                throw ValidationError("analysis windows overlap");

    auto tally = [&](const Span& s, std::size_t& bins) {
        std::uint64_t n = 0;
        for (std::size_t i = 0; i < hist.counts.size(); ++i) {
            const double c = hist.bin_center_ps(i);
            if (c >= s.lo && c < s.hi) {
                n += hist.counts[i];
                ++bins;
            }
        }
        return n;
    };

    WindowCounts out;
    std::size_t signal_bins = 0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        std::size_t bins = 0;
        out.counts.push_back(tally(all[i], bins));
        if (i == 0)
            signal_bins = bins;
    }
    std::size_t bg_bins = 0;
    for (std::size_t i = windows.size(); i < all.size(); ++i)
        out.background_raw += tally(all[i], bg_bins);
    if (bg_bins > 0)
        out.background = static_cast<double>(out.background_raw) * static_cast<double>(signal_bins) /
                         static_cast<double>(bg_bins);
    return out;
}

} // namespace afc
