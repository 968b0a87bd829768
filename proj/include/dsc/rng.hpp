#ifndef DSC_RNG_HPP
#define DSC_RNG_HPP

#include <array>
#include <cstdint>

namespace dsc {

// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3"). Every 128-bit output block is a pure
// function of (key, counter), so independent substreams are just disjoint
// counter ranges: no state to carry, no ordering constraints between
// workers.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// One substream of draws under a seed. Draw i is a pure function of
// (seed, stream, i); distinct streams never share a counter.
class SubstreamRng {
  public:
    SubstreamRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::array<std::uint32_t, 4> block(std::uint64_t i) const;

    // Two independent uniforms on (0,1) from one block, 53-bit mantissas.
    double uniform(std::uint64_t i) const;
    std::array<double, 2> uniform_pair(std::uint64_t i) const;

    // Standard normal via Box-Muller on one block.
    double normal(std::uint64_t i) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

}  // namespace dsc

#endif
