#include "afcmem/analysis.hpp"
#include "afcmem/errors.hpp"
#include "afcmem/qubit.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace afc;

namespace {

MemoryModel small_model()
{
    MemoryModel m;
    m.grid = SpectralGrid(40e9, 1 << 14);
    return m;
}

} // namespace

TEST_CASE("qubit states")
{
    const auto e = TimeBinQubit::early_state(1.4e-9);
    CHECK_NOTHROW(e.validate());
    CHECK(e.phase() == 0.0);
    const auto s = TimeBinQubit::superposition(1.0, 1.4e-9);
    CHECK(s.phase() == doctest::Approx(1.0));
    CHECK(std::norm(s.early) + std::norm(s.late) == doctest::Approx(1.0));
    TimeBinQubit bad;
    bad.late = 1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = TimeBinQubit{};
    bad.bin_separation = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("encoding places the bins one separation apart")
{
    const SpectralGrid g(40e9, 1 << 14);
    const auto wp = encode(TimeBinQubit::superposition(0.0, 1.4e-9), gaussian_pulse(g, 5e9));
    CHECK(window_energy(wp, 0.0, 1e-9) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(window_energy(wp, 1.4e-9, 1e-9) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK_THROWS_AS(encode(TimeBinQubit::early_state(0.1e-9), gaussian_pulse(g, 5e9)), ValidationError);
}

TEST_CASE("projection setting consistency")
{
    ProjectionSetting s;
    CHECK_NOTHROW(s.validate(1.4e-9, 1e-12));
    s.recall_time_2 = 7.5e-9;
    CHECK_THROWS_AS(s.validate(1.4e-9, 1e-12), ValidationError);
    s = ProjectionSetting{};
    s.amplitude_balance = 1.5;
    CHECK_THROWS_AS(s.validate(1.4e-9, 1e-12), ValidationError);
}

TEST_CASE("double comb construction")
{
    CombSpec base;
    ProjectionSetting s;
    const auto [a, b] = double_afc_combs(s, base);
    CHECK(a.tooth_spacing == doctest::Approx(1.0 / 6.0e-9));
    CHECK(b.tooth_spacing == doctest::Approx(1.0 / 7.4e-9));
    CHECK(a.finesse() == doctest::Approx(base.finesse()));
    CHECK(b.finesse() == doctest::Approx(base.finesse()));
    CHECK(a.amplitude_weight == doctest::Approx(0.5));
    CHECK(b.amplitude_weight == doctest::Approx(0.5));
}

TEST_CASE("single comb storage keeps basis states apart")
{
    const auto m = small_model();
    const auto e = store(m, TimeBinQubit::early_state(1.4e-9));
    const auto l = store(m, TimeBinQubit::late_state(1.4e-9));
    CHECK(e.early > 50.0 * e.late);
    CHECK(l.late > 50.0 * l.early);
    CHECK(e.early == doctest::Approx(l.late).epsilon(1e-6));
}

TEST_CASE("double comb fringe follows the qubit phase")
{
    const auto m = small_model();
    for (double phi : {0.0, 0.7, 2.0}) {
        const auto q = TimeBinQubit::superposition(phi, 1.4e-9);
        std::vector<double> phases, counts;
        for (int k = 0; k < 4; ++k) {
            ProjectionSetting s;
            s.analyzer_phase = 0.5 * std::numbers::pi * k;
            phases.push_back(s.analyzer_phase);
            counts.push_back(project(m, q, s).interference * 1e6);
        }
        const auto fit = visibility_fit(phases, counts);
        CHECK(fit.visibility >= 0.99);
        CHECK(std::abs(std::remainder(fit.theta0 - phi, 2.0 * std::numbers::pi)) < 0.02);
    }
}

TEST_CASE("side windows carry a quarter of the single-comb echo each")
{
    const auto m = small_model();
    ProjectionSetting s;
    const auto w = project(m, TimeBinQubit::superposition(0.0, 1.4e-9), s);
    CHECK(w.early == doctest::Approx(w.late).epsilon(0.1));
    CHECK(w.interference > 3.0 * w.early);
}
