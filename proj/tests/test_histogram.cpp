#include "afcmem/errors.hpp"
#include "afcmem/montecarlo.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace afc;

namespace {

Frame test_frame()
{
    MonteCarloConfig c;
    c.timing = {1e-3, 0.2e-3, 1e-3};
    return Frame::from(c);
}

/// Random log with gates and InGaAs clicks near (and sometimes inside) them.
EventLog random_log(std::mt19937_64& rng, std::size_t n_si)
{
    EventLog log;
    log.meta.frame = test_frame();
    const auto& f = log.meta.frame;
    std::uniform_int_distribution<std::int64_t> slot(0, f.slots_per_cycle() - 1);
    std::uniform_int_distribution<std::int64_t> cycle(0, 2);
    std::uniform_int_distribution<std::int64_t> offset(-f.offset_ps, f.period_ps - f.offset_ps - 1);
    std::uniform_int_distribution<std::int64_t> near(-4000, 4000);
    std::bernoulli_distribution coin(0.5), gated(0.8);
    for (std::size_t i = 0; i < n_si; ++i) {
        const std::int64_t t = f.pump_time(cycle(rng), slot(rng)) + offset(rng);
        log.events.push_back({DetectorId::si, t, gated(rng)});
        if (coin(rng)) {
            const auto g = f.gate_of(t);
            log.events.push_back({DetectorId::ingaas, (g.first + g.second) / 2 + near(rng), true});
        }
    }
    std::sort(log.events.begin(), log.events.end(),
              [](const Event& a, const Event& b) { return a.time_ps < b.time_ps; });
    return log;
}

TdcHistogram flat(std::size_t bins, std::uint64_t level)
{
    TdcHistogram h;
    h.origin_ps = 0;
    h.bin_width_ps = 100;
    h.counts.assign(bins, level);
    return h;
}

} // namespace

TEST_CASE("one Si event at 6.0 ns lands in the 6.0 ns bin")
{
    EventLog log;
    log.meta.frame = test_frame();
    log.events.push_back({DetectorId::si, log.meta.frame.pump_time(0, 3) + 6000, true});
    const auto h = tdc_histogram(log, 100e-12, HistogramMode::singles);
    CHECK(h.total() == 1);
    const auto b = h.bin_of(6000);
    CHECK(h.counts[b] == 1);
    CHECK(h.bin_center_ps(b) == doctest::Approx(6050.0));
    CHECK(h.counts.size() == 125);
    CHECK_THROWS_AS(tdc_histogram(log, 0.0, HistogramMode::singles), ValidationError);
}

TEST_CASE("histograms agree with the brute-force pairing oracle")
{
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        const auto log = random_log(rng, 50 + 20 * static_cast<std::size_t>(trial));
        const auto fast = conditional_events(log);
        CHECK(fast == oracle::conditional_pairs(log));

        const auto h = tdc_histogram(log, 250e-12, HistogramMode::conditional);
        CHECK(h.counts == oracle::recount(log, fast, h.origin_ps, h.bin_width_ps, h.counts.size()));

        std::vector<std::size_t> started;
        for (std::size_t i = 0; i < log.events.size(); ++i)
            if (log.events[i].detector == DetectorId::si && log.events[i].gate)
                started.push_back(i);
        const auto s = tdc_histogram(log, 250e-12, HistogramMode::singles);
        CHECK(s.total() == started.size());
        CHECK(s.counts == oracle::recount(log, started, s.origin_ps, s.bin_width_ps, s.counts.size()));
    }
}

TEST_CASE("window counts")
{
    SUBCASE("delta peak")
    {
        auto h = flat(100, 0);
        h.counts[42] = 17;
        const auto w = window_counts(h, {{4.2e-9, 1e-9}, {7.0e-9, 1e-9}}, {});
        CHECK(w.counts[0] == 17);
        CHECK(w.counts[1] == 0);
    }
    SUBCASE("uniform histogram, equal windows")
    {
        const auto w = window_counts(flat(100, 3), {{2e-9, 1e-9}, {6e-9, 1e-9}}, {{8e-9, 1e-9}});
        CHECK(w.counts[0] == w.counts[1]);
        CHECK(w.background == doctest::Approx(static_cast<double>(w.counts[0])));
    }
    SUBCASE("peak on flat background")
    {
        auto h = flat(100, 2);
        for (int i = 50; i < 60; ++i)
            h.counts[static_cast<std::size_t>(i)] += 9;
        // Signal window covers bins 50..59; two half-width background windows.
        const auto w = window_counts(h, {{5.5e-9, 1e-9}}, {{1.25e-9, 0.5e-9}, {8.25e-9, 0.5e-9}});
        CHECK(w.counts[0] == 110);
        CHECK(w.background_raw == 20);
        CHECK(w.background == 20.0);
        CHECK(static_cast<double>(w.counts[0]) / w.background == 5.5);
    }
    SUBCASE("overlap is rejected")
    {
        CHECK_THROWS_AS(window_counts(flat(100, 1), {{5e-9, 1e-9}, {5.5e-9, 1e-9}}, {}), ValidationError);
        CHECK_THROWS_AS(window_counts(flat(100, 1), {{5e-9, 1e-9}}, {{5.2e-9, 1e-9}}), ValidationError);
        CHECK_THROWS_AS(window_counts(flat(100, 1), {{5e-9, 0.0}}, {}), ValidationError);
    }
}

TEST_CASE("histogram export")
{
    auto h = flat(3, 1);
    h.origin_ps = -2000;
    std::ostringstream os;
    write_histogram(os, h);
    CHECK(os.str() == "# bin_center_ps\tcounts\n-1950\t1\n-1850\t1\n-1750\t1\n");
}
