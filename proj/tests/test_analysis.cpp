#include "afcmem/analysis.hpp"
#include "afcmem/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace afc;

TEST_CASE("basis fidelities from counts")
{
    const auto r = fidelity_el(8652, 1348, 8376, 1624);
    CHECK(r.early.value == doctest::Approx(0.8652).epsilon(1e-12));
    CHECK(r.late.value == doctest::Approx(0.8376).epsilon(1e-12));
    CHECK(r.mean.value == doctest::Approx(0.8514).epsilon(1e-12));

    const auto half = count_fidelity(50, 50);
    CHECK(half.value == 0.5);
    CHECK(half.sigma == doctest::Approx(0.05).epsilon(1e-12));
    const auto perfect = count_fidelity(40, 0);
    CHECK(perfect.value == 1.0);
    CHECK(perfect.sigma == 0.0);
    CHECK_THROWS_AS(count_fidelity(0, 0), ValidationError);
    CHECK_THROWS_AS(fidelity_el(1, 1, 0, 0), ValidationError);
}

TEST_CASE("perfect fringe")
{
    const double pi = std::numbers::pi;
    const auto f = visibility_fit({0, pi / 2, pi, 3 * pi / 2}, {200, 100, 0, 100});
    CHECK(f.visibility == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(f.theta0) < 1e-12);
    CHECK(f.amplitude == doctest::Approx(100.0));
}

TEST_CASE("noiseless fringes are recovered exactly")
{
    for (int n : {3, 4, 7}) {
        for (double theta0 : {-2.5, 0.0, 0.9, 3.0}) {
            const double a = 120.0, v = 0.6;
            std::vector<double> ph, c;
            for (int k = 0; k < n; ++k) {
                ph.push_back(2.0 * std::numbers::pi * k / n + 0.1);
                c.push_back(a * (1.0 + v * std::cos(ph.back() - theta0)));
            }
            const auto f = visibility_fit(ph, c);
            CHECK(std::abs(f.visibility - v) < 1e-9);
            CHECK(std::abs(std::remainder(f.theta0 - theta0, 2 * std::numbers::pi)) < 1e-9);
            CHECK(std::abs(f.amplitude - a) < 1e-9 * a);
        }
    }
}

TEST_CASE("reference conditional fringe gives V = 0.701")
{
    const double pi = std::numbers::pi;
    std::vector<double> ph = {0, pi / 2, pi, 3 * pi / 2}, c;
    for (double p : ph)
        c.push_back(60.0 * (1.0 + 0.701 * std::cos(p)));
    const auto f = visibility_fit(ph, c);
    CHECK(f.visibility == doctest::Approx(0.701).epsilon(1e-9));
    CHECK(f.sigma_visibility > 0.0);
    CHECK(f.sigma_visibility < 0.2);
}

TEST_CASE("fit rejects poor designs")
{
    CHECK_THROWS_AS(visibility_fit({0, 1}, {1, 2}), ValidationError);
    CHECK_THROWS_AS(visibility_fit({0, 0.5, 1.0}, {1, 2, 3}), ValidationError);
    CHECK_THROWS_AS(visibility_fit({0, 0, 0, 3.1416}, {1, 2, 3, 4}), ValidationError);
    CHECK_THROWS_AS(visibility_fit({0, 2, 4}, {1, 2}), ValidationError);
    CHECK_NOTHROW(visibility_fit({0, std::numbers::pi / 2, std::numbers::pi}, {2, 1, 0}));
}

TEST_CASE("visibility clipping and the unreliable flag")
{
    const double pi = std::numbers::pi;
    const auto over = visibility_fit({0, pi / 2, pi, 3 * pi / 2}, {200, 90, 0, 90});
    CHECK(over.raw_visibility > 1.0);
    CHECK(over.visibility == 1.0);
    const auto noisy = visibility_fit({0, pi / 2, pi, 3 * pi / 2}, {1, 0, 1, 2});
    CHECK(noisy.unreliable == (noisy.sigma_visibility > 1.0));
}

TEST_CASE("fitted visibility is unbiased on Poisson data")
{
    std::mt19937_64 rng(99);
    const double a = 2000.0, v = 0.7, t0 = 0.4;
    const double pi = std::numbers::pi;
    const std::vector<double> ph = {0, pi / 2, pi, 3 * pi / 2};
    const int trials = 1000;
    double sum = 0, sum2 = 0, sigma_sum = 0;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> c;
        for (double p : ph)
            c.push_back(static_cast<double>(std::poisson_distribution<long>(a * (1 + v * std::cos(p - t0)))(rng)));
        const auto f = visibility_fit(ph, c);
        sum += f.raw_visibility;
        sum2 += f.raw_visibility * f.raw_visibility;
        sigma_sum += f.sigma_visibility;
    }
    const double mean = sum / trials;
    const double sd = std::sqrt(sum2 / trials - mean * mean);
    CHECK(std::abs(mean - v) < 2.0 * sd / std::sqrt(trials));
    CHECK(sigma_sum / trials == doctest::Approx(sd).epsilon(0.1));
}

TEST_CASE("fidelity from visibility")
{
    CHECK(fidelity_from_visibility(0.701, 0.059).value == doctest::Approx(0.8505));
    CHECK(fidelity_from_visibility(0.701, 0.059).sigma == doctest::Approx(0.0295));
    CHECK(fidelity_from_visibility(1.0, 0.0).value == 1.0);
    CHECK(fidelity_from_visibility(0.364, 0.087).value == doctest::Approx(0.682));
    CHECK_THROWS_AS(fidelity_from_visibility(1.2, 0.1), ValidationError);
}

TEST_CASE("average fidelity")
{
    CHECK(std::abs(average_fidelity({0.954, 0}, {0.851, 0}).value - 0.885) < 1e-3);
    CHECK(std::abs(average_fidelity({0.8514, 0}, {0.682, 0}).value - 0.738) < 1e-3);
    CHECK(average_fidelity({1, 0}, {1, 0}).value == 1.0);
    CHECK(average_fidelity({0.5, 0.03}, {0.5, 0.03}).sigma == doctest::Approx(std::sqrt(0.0009 * 5) / 3));
}

TEST_CASE("bound verdicts")
{
    auto v = bound_verdict(0.885, 0.020);
    CHECK(v[0].sigmas == doctest::Approx(10.9).epsilon(0.01));
    CHECK(v[1].sigmas == doctest::Approx(2.6).epsilon(0.02));
    CHECK(v[0].exceeded);
    CHECK(v[1].exceeded);
    v = bound_verdict(2.0 / 3.0, 0.01);
    CHECK(v[0].sigmas == 0.0);
    CHECK_FALSE(v[0].exceeded);
    v = bound_verdict(0.738, 0.029);
    CHECK(v[0].exceeded);
    CHECK(v[0].sigmas == doctest::Approx(2.46).epsilon(0.01));
    CHECK_FALSE(v[1].exceeded);
    CHECK_THROWS_AS(bound_verdict(0.9, 0.0), ValidationError);
}

TEST_CASE("signal to noise")
{
    CHECK(snr(100, 20).value == 5.0);
    CHECK(snr(220, 10).value == 22.0);
    CHECK(snr(7, 7).value == 1.0);
    const auto zero = snr(30, 0);
    CHECK(zero.lower_bound);
    CHECK(std::isfinite(zero.value));
    CHECK_FALSE(snr(1, 1).lower_bound);
}

TEST_CASE("report identities and serialization")
{
    const double pi = std::numbers::pi;
    FidelityInputs in{900, 100, 880, 120, {0, pi / 2, pi, 3 * pi / 2}, {150, 90, 30, 90}, snr(900, 40)};
    const auto r = make_report(in);
    CHECK(std::abs(r.f_el.value - 0.5 * (r.f_e.value + r.f_l.value)) <= 1e-12);
    CHECK(std::abs(r.f_phi.value - 0.5 * (1 + r.fit.visibility)) <= 1e-12);
    CHECK(std::abs(r.f_bar.value - (r.f_el.value + 2 * r.f_phi.value) / 3) <= 1e-12);
    std::ostringstream kv, tsv;
    write_key_values(kv, r, "x");
    for (const char* key : {"x.F_e:", "x.F_l:", "x.F_el:", "x.V:", "x.F_phi:", "x.F_bar:", "x.snr:",
                            "x.bound_classical_sigmas:", "x.bound_cloner_exceeded:"})
        CHECK(kv.str().find(key) != std::string::npos);
    write_tsv_header(tsv);
    write_tsv_row(tsv, r, "x");
    const std::string table = tsv.str();
    CHECK(std::count(table.begin(), table.end(), '\n') == 2);

    FidelityReport broken = r;
    broken.f_el.value += 1e-6;
    CHECK_THROWS_AS(broken.check(), ValidationError);
}
