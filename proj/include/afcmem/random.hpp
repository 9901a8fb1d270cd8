#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace afc {

/// Philox4x32-10 counter-based generator. Every
/// (key, counter) pair maps to an independent block of four 32-bit words, so
/// each pump pulse can own a substream without any shared state.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit constexpr Philox4x32(Key key) : key_(key) {}
    explicit constexpr Philox4x32(std::uint64_t seed)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}
    {
    }

    constexpr Counter operator()(Counter ctr) const
    {
        Key k = key_;
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                k[0] += kW0;
                k[1] += kW1;
            }
            const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k[1], static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;
    Key key_;
};

/// Two uniforms in [0, 1) with 53-bit resolution from one Philox block.
struct UniformPair {
    double first;
    double second;
};

inline UniformPair to_uniforms(const Philox4x32::Counter& block)
{
    constexpr double scale = 1.0 / 9007199254740992.0; // 2^-53
    const std::uint64_t a = (std::uint64_t{block[0]} << 32 | block[1]) >> 11;
    const std::uint64_t b = (std::uint64_t{block[2]} << 32 | block[3]) >> 11;
    return {static_cast<double>(a) * scale, static_cast<double>(b) * scale};
}

/// Per-pulse substream addressing: (pulse index, stream id, draw index).
class PulseStreams {
public:
    explicit PulseStreams(std::uint64_t seed) : rng_(seed) {}

    UniformPair uniforms(std::uint64_t pulse, std::uint32_t stream, std::uint32_t draw) const
    {
        return to_uniforms(rng_({static_cast<std::uint32_t>(pulse),
                                 static_cast<std::uint32_t>(pulse >> 32), stream, draw}));
    }

    /// Standard normal variate (Box-Muller on one block).
    double normal(std::uint64_t pulse, std::uint32_t stream, std::uint32_t draw) const
    {
        const auto u = uniforms(pulse, stream, draw);
        const double r = std::sqrt(-2.0 * std::log1p(-u.first));
        return r * std::cos(2.0 * std::numbers::pi * u.second);
    }

private:
    Philox4x32 rng_;
};

} // namespace afc
