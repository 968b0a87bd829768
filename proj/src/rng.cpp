#include "dsc/rng.hpp"

#include <cmath>
#include <numbers>

namespace dsc {

namespace {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// uniform on (0,1) from 64 bits: top 53 bits, offset so 0 is excluded
inline double bits_to_unit(std::uint64_t v) {
    return (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(M0, counter[0], hi0, lo0);
        mulhilo(M1, counter[2], hi1, lo1);
        counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return counter;
}

std::array<std::uint32_t, 4> SubstreamRng::block(std::uint64_t i) const {
    const std::array<std::uint32_t, 4> counter = {
        static_cast<std::uint32_t>(stream_ >> 32), static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(i >> 32), static_cast<std::uint32_t>(i)};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_ >> 32),
                                              static_cast<std::uint32_t>(seed_)};
    return philox4x32(counter, key);
}

double SubstreamRng::uniform(std::uint64_t i) const {
    auto w = block(i);
    return bits_to_unit((static_cast<std::uint64_t>(w[0]) << 32) | w[1]);
}

std::array<double, 2> SubstreamRng::uniform_pair(std::uint64_t i) const {
    auto w = block(i);
    return {bits_to_unit((static_cast<std::uint64_t>(w[0]) << 32) | w[1]),
            bits_to_unit((static_cast<std::uint64_t>(w[2]) << 32) | w[3])};
}

double SubstreamRng::normal(std::uint64_t i) const {
    auto [u1, u2] = uniform_pair(i);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace dsc
