#ifndef DSC_MIXING_HPP
#define DSC_MIXING_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dsc {

// Orthonormal real-DFT mixing matrix. Row 0 is constant 1/sqrt(b), row b/2
// alternates (-1)^j/sqrt(b), rows 1..b/2-1 are sqrt(2/b)*cos(2*pi*i*j/b) and
// rows b/2+1..b-1 are sqrt(2/b)*sin(2*pi*(i-b/2)*j/b). Requires even b >= 2.
// Entries are precomputed and stored densely; b is capped at 4096.
class MixingMatrix {
  public:
    static constexpr int kMaxSize = 4096;

    static MixingMatrix build(int b);  // throws std::invalid_argument on odd b, b < 2, b > cap

    int size() const { return b_; }
    double entry(int i, int j) const { return entries_[static_cast<std::size_t>(i) * b_ + j]; }
    std::span<const double> row(int i) const {
        return {entries_.data() + static_cast<std::size_t>(i) * b_, static_cast<std::size_t>(b_)};
    }

    // y = Q x
    void apply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> apply(std::span<const double> x) const;
    // x = Q^T y (Q is orthonormal, so the transpose is the inverse)
    void apply_inverse(std::span<const double> y, std::span<double> x) const;
    std::vector<double> apply_inverse(std::span<const double> y) const;

  private:
    MixingMatrix(int b, std::vector<double> entries) : b_(b), entries_(std::move(entries)) {}

    int b_ = 0;
    std::vector<double> entries_;  // row-major b*b
};

// The interleaved view of n mixed length-b blocks: vectors[l][t] is element
// t*b + l of the concatenated mixed stream, i.e. column l collects the l-th
// coordinate of each block.
struct InterleavedBlocks {
    int n = 0;
    int b = 0;
    std::vector<std::vector<double>> vectors;  // b vectors of length n
};

InterleavedBlocks interleave(std::span<const double> mixed_stream, int n, int b);
std::vector<double> deinterleave(const InterleavedBlocks& blocks);

// Mixed-radix packing of b per-block indices into one integer. The packed
// value can exceed 64 bits (e.g. 256 one-bit indices), so it is held as
// base-2^32 limbs. pack/unpack form an exact bijection; digit j has radix
// radices[j] and the first digit is the most significant.
class PackedIndex {
  public:
    static PackedIndex pack(std::span<const std::uint64_t> indices,
                            std::span<const std::uint64_t> radices);
    std::vector<std::uint64_t> unpack() const;

    const std::vector<std::uint64_t>& radices() const { return radices_; }
    const std::vector<std::uint32_t>& limbs() const { return limbs_; }  // little-endian, no leading zeros

    // value as decimal text (diagnostics / CSV)
    std::string to_decimal() const;

    bool operator==(const PackedIndex&) const = default;

  private:
    std::vector<std::uint32_t> limbs_;
    std::vector<std::uint64_t> radices_;
};

}  // namespace dsc

#endif
