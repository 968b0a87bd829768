#ifndef DSC_CODECS_HPP
#define DSC_CODECS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsc/sources.hpp"

namespace dsc {

// Scalar quantizer: sorted reconstruction levels with strictly increasing
// cell thresholds (midpoints after Lloyd-Max training). A value equal to a
// threshold encodes into the upper cell.
struct ScalarCodebook {
    std::vector<double> levels;
    std::vector<double> thresholds;  // levels.size()-1 entries
    double design_variance = 1.0;    // Gaussian variance the book was trained for
    double train_mse = 0.0;          // expected distortion under that Gaussian

    std::size_t size() const { return levels.size(); }
    std::size_t encode(double x) const;
    double decode(std::size_t index) const { return levels.at(index); }

    void validate() const;  // ordering + midpoint-consistency invariants
};

class lloyd_convergence_error : public std::runtime_error {
  public:
    lloyd_convergence_error(ScalarCodebook last, int iterations, double movement)
        : std::runtime_error("lloyd_max_train: no convergence after " +
                             std::to_string(iterations) + " iterations (movement " +
                             std::to_string(movement) + ")"),
          last_iterate(std::move(last)),
          iterations(iterations),
          movement(movement) {}

    ScalarCodebook last_iterate;
    int iterations;
    double movement;
};

// Lloyd's fixed-point iteration against the zero-mean Gaussian density with
// the given variance, integrated on a fixed grid of 10^4 points over +-8
// standard deviations. rate is in whole bits (2^rate levels).
ScalarCodebook lloyd_max_train(double variance, int rate, int max_iters = 5000, double tol = 1e-10);

// Plain-text codebook format: header line "levels <count>", one level per line.
void save_codebook(const ScalarCodebook& cb, std::ostream& out);
ScalarCodebook load_codebook(std::istream& in);

// The k-encoder code interface: encoder m maps its length-n block to an index
// below index_sizes[m], the decoder for component m maps the full index tuple
// to a length-n reconstruction. Index 0 is reserved for the erasure symbol
// when one is present.
struct MultiterminalCode {
    int k = 0;
    int n = 0;
    std::vector<double> rates;                // bits per source symbol
    std::vector<std::uint64_t> index_sizes;   // per encoder
    std::vector<std::function<std::uint64_t(std::span<const double>)>> encoders;
    std::vector<std::function<std::vector<double>(std::span<const std::uint64_t>)>> decoders;
};

// Product quantizer: each of the n symbols of encoder m goes through
// codebooks[m] independently; the decoder emits per-symbol levels. Requires
// n*log2(levels) <= 62 so the packed index fits a machine word.
MultiterminalCode scalar_code_as_multiterminal(const std::vector<ScalarCodebook>& codebooks, int n);

// Same encoders, but the decoder applies the per-symbol linear MMSE estimate
// xhat = K (K + diag(q))^-1 y to the vector y of k dequantized values, with
// q_m the quantizer noise variance of codebook m. Throws if K + diag(q) is
// singular.
MultiterminalCode build_lmmse_decoder_code(const CovarianceMatrix& K,
                                           const std::vector<ScalarCodebook>& codebooks, int n);

// Rate-0 reference: one codeword, all-zero reconstruction.
MultiterminalCode rate_zero_code(int k, int n);

struct DistortionEstimate {
    std::vector<double> mse;  // per encoder, per-symbol
    std::vector<double> se;   // Monte Carlo standard errors
    int trials = 0;
};

// The achievability object: per-encoder rates with the distortions they buy.
struct RateDistortionVector {
    std::vector<double> rates;        // bits per symbol
    std::vector<double> distortions;  // per-symbol MSE

    void validate() const;  // entries must be nonnegative and aligned
};

RateDistortionVector rate_distortion_point(const MultiterminalCode& code,
                                           const DistortionEstimate& estimate);

// Monte Carlo estimate of (1/n) E||x_m - xhat_m||^2 per encoder. Trial t
// consumes substreams stream0 + t*k .. stream0 + t*k + k-1, so the estimate
// is independent of the worker count. trials >= 100.
DistortionEstimate evaluate_distortion(const MultiterminalCode& code, const SourceSpec& spec,
                                       int trials, std::uint64_t stream0 = 0, unsigned threads = 0);

namespace detail {

// Shared Monte Carlo driver: reconstruct(block, out) fills the k x n
// reconstruction for one trial's source block.
DistortionEstimate mc_distortion(
    int k, int n, const SourceSpec& spec, int trials, std::uint64_t stream0, unsigned threads,
    const std::function<void(const SourceBlock&, std::vector<std::vector<double>>&)>& reconstruct);

}  // namespace detail

}  // namespace dsc

#endif
