#ifndef DSC_GAUSSIANIZE_HPP
#define DSC_GAUSSIANIZE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "dsc/codecs.hpp"
#include "dsc/mixing.hpp"
#include "dsc/sources.hpp"

namespace dsc {

// A blocklength-n base code wrapped into a blocklength-n*b code: each encoder
// mixes its n length-b blocks with Q, interleaves them into b length-n
// vectors, runs the base encoder on each, and packs the b indices into one
// integer. The decoder inverts every step. Rates per symbol are unchanged.
class GaussianizedCode {
  public:
    GaussianizedCode(MultiterminalCode base, int b);  // throws on odd b or b < 2

    int k() const { return base_.k; }
    int base_n() const { return base_.n; }
    int b() const { return mix_.size(); }
    int block_length() const { return base_.n * mix_.size(); }
    const MultiterminalCode& base() const { return base_; }
    const MixingMatrix& mixing() const { return mix_; }
    std::vector<std::uint64_t> radices(int m) const;  // b copies of the base index size

    PackedIndex encode(int m, std::span<const double> x) const;  // x has length n*b
    std::vector<double> decode(int m, std::span<const PackedIndex> packed) const;  // k indices

    // encoder-side pipeline up to the per-block index lists (shared by encode
    // and the diagnostics below)
    struct EncodedBlocks {
        std::vector<InterleavedBlocks> mixed;             // per encoder
        std::vector<std::vector<std::uint64_t>> indices;  // per encoder, b entries
    };
    EncodedBlocks encode_blocks(const SourceBlock& block) const;

  private:
    MultiterminalCode base_;
    MixingMatrix mix_;
};

inline GaussianizedCode wrap_code(MultiterminalCode base, int b) {
    return GaussianizedCode(std::move(base), b);
}

DistortionEstimate evaluate_distortion(const GaussianizedCode& code, const SourceSpec& spec,
                                       int trials, std::uint64_t stream0 = 0, unsigned threads = 0);

// Distortion of each interleaved block l = 0..b-1 plus the worst block, per
// encoder. The mean over l equals the overall wrapped distortion (unitarity),
// which is returned alongside for the numeric cross-check.
struct PerBlockDistortion {
    std::vector<std::vector<double>> mse;  // [encoder][l]
    std::vector<std::vector<double>> se;
    std::vector<int> worst_block;          // argmax_l per encoder
    DistortionEstimate overall;
};
PerBlockDistortion per_block_distortion(const GaussianizedCode& code, const SourceSpec& spec,
                                        int trials, std::uint64_t stream0 = 0,
                                        unsigned threads = 0);

// Wrapped distortion across a sweep of mixing lengths, against the base
// code's distortion on the Gaussian source with the same covariance. An entry
// b = 1 means the unwrapped base code (the raw baseline).
struct ConvergenceRow {
    int b;
    int encoder;
    double distortion;
    double se;
    double gaussian_ref;
    double ref_se;
};
std::vector<ConvergenceRow> distortion_convergence(const MultiterminalCode& base,
                                                   const SourceSpec& spec,
                                                   std::span<const int> b_list, int trials,
                                                   std::uint64_t stream0 = 0, unsigned threads = 0);

}  // namespace dsc

#endif
