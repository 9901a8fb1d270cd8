#include "afcmem/errors.hpp"
#include "afcmem/experiment.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace afc;
namespace fs = std::filesystem;

namespace {

ExperimentConfig quick_config()
{
    auto c = default_config();
    c.grid = SpectralGrid(40e9, 1 << 16);
    c.mc.timing = {1e-3, 0.2e-3, 10e-3};
    c.storage_run_duration = 2 * c.mc.timing.cycle();
    c.projection_run_duration = c.mc.timing.cycle();
    return c;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("afcmem_test_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("job seeds are distinct")
{
    CHECK(job_seed(1, 0) != job_seed(1, 1));
    CHECK(job_seed(1, 0) != job_seed(2, 0));
    CHECK(job_seed(5, 3) == job_seed(5, 3));
}

TEST_CASE("protocol report holds all estimators")
{
    const auto r = run_protocol(quick_config());
    REQUIRE(r.jobs.size() == 6);
    CHECK(r.storage_efficiency() == doctest::Approx(0.02).epsilon(0.02));
    for (const auto* rep : {&r.singles, &r.conditional}) {
        CHECK_NOTHROW(rep->check());
        CHECK(rep->f_bar.sigma > 0.0);
    }
    std::ostringstream os;
    write_report(os, r);
    for (const char* key : {"config_digest:", "singles.F_e:", "singles.F_l:", "singles.F_el:", "singles.V:",
                            "singles.F_phi:", "singles.F_bar:", "conditional.F_bar:", "conditional.snr:",
                            "conditional.bound_classical_exceeded:", "conditional.bound_cloner_exceeded:"})
        CHECK(os.str().find(key) != std::string::npos);
}

TEST_CASE("noiseless detection gives near-perfect conditional fidelity")
{
    auto c = quick_config();
    c.mc.si = {1.0, 0.0, 0.0, 0.0, false, 0.0};
    c.mc.ingaas = {1.0, 0.0, 0.0, 0.0, true, 5e-9};
    c.mc.channel.signal_loss_db = 0.0;
    const auto r = run_protocol(c);
    CHECK(r.conditional.f_bar.value > 0.99);
}

TEST_CASE("artifacts are complete and reproducible")
{
    const auto c = quick_config();
    const auto a = scratch("a"), b = scratch("b");
    run_experiment(c, a, 2);
    run_experiment(c, b, 1);
    CHECK_FALSE(fs::exists(a / "INCOMPLETE"));
    for (const char* name : {"report.txt", "report.tsv", "fringe.txt", "config.json", "events_early.txt",
                             "events_phase3.txt", "hist_late_conditional.txt", "hist_phase0_singles.txt"}) {
        REQUIRE(fs::exists(a / name));
        CHECK(slurp(a / name) == slurp(b / name));
    }
    auto anywhere = c;
    anywhere.output_dir.clear(); // the digest ignores where artifacts go
    CHECK(slurp(a / "report.txt").find(config_digest(anywhere)) != std::string::npos);
    CHECK(parse_config(slurp(a / "config.json")).seed == c.seed);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("invalid config never starts a run")
{
    auto c = quick_config();
    c.comb.tooth_width = 2 * c.comb.tooth_spacing;
    const auto dir = scratch("bad");
    CHECK_THROWS_AS(run_experiment(c, dir), ValidationError);
    CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("sweeps")
{
    const auto c = quick_config();
    CHECK(sweep(c, "comb.finesse", {}, {1}).empty());
    CHECK_THROWS_AS(sweep(c, "comb.no_such_field", {}, {1}), ConfigError);

    const auto rows = sweep(c, "comb.peak_optical_depth", {0.5, 2.0}, {}, 1, true);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].efficiency > rows[0].efficiency);
    CHECK(std::isnan(rows[0].snr_singles));
    std::ostringstream os;
    write_sweep(os, "comb.peak_optical_depth", rows);
    CHECK(os.str().rfind("comb.peak_optical_depth\tefficiency", 0) == 0);
}

TEST_CASE("lower InGaAs dark probability does not lower the conditional SNR")
{
    auto c = quick_config();
    const auto rows = sweep(c, "detectors.ingaas.dark_probability_per_gate", {0.1, 0.03, 0.003}, {1, 2, 3, 4, 5});
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].snr_conditional >= rows[0].snr_conditional);
    CHECK(rows[2].snr_conditional >= rows[1].snr_conditional);
}
