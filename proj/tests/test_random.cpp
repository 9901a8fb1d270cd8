#include "afcmem/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace afc;

TEST_CASE("philox known-answer vectors")
{
    using C = Philox4x32::Counter;
    CHECK(Philox4x32(Philox4x32::Key{0, 0})(C{0, 0, 0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32(Philox4x32::Key{0xffffffff, 0xffffffff})(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32(Philox4x32::Key{0xa4093822, 0x299f31d0})(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("substreams are reproducible and distinct")
{
    const PulseStreams a(42), b(42), c(43);
    CHECK(a.uniforms(7, 1, 0).first == b.uniforms(7, 1, 0).first);
    CHECK(a.uniforms(7, 1, 0).first != c.uniforms(7, 1, 0).first);
    CHECK(a.uniforms(7, 1, 0).first != a.uniforms(7, 2, 0).first);
    CHECK(a.uniforms(7, 1, 0).first != a.uniforms(8, 1, 0).first);
    CHECK(a.uniforms(7, 1, 0).first != a.uniforms(7, 1, 1).first);
}

TEST_CASE("uniform and normal moments")
{
    const PulseStreams s(1);
    const int n = 200000;
    double sum = 0, sum2 = 0, nsum = 0, nsum2 = 0;
    for (int i = 0; i < n; ++i) {
        const auto u = s.uniforms(static_cast<std::uint64_t>(i), 0, 0);
        REQUIRE(u.first >= 0.0);
        REQUIRE(u.first < 1.0);
        sum += u.first;
        sum2 += u.first * u.first;
        const double z = s.normal(static_cast<std::uint64_t>(i), 1, 0);
        nsum += z;
        nsum2 += z * z;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(sum2 / n - (sum / n) * (sum / n) == doctest::Approx(1.0 / 12.0).epsilon(0.02));
    CHECK(std::abs(nsum / n) < 0.01);
    CHECK(nsum2 / n == doctest::Approx(1.0).epsilon(0.02));
}
