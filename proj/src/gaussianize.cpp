#include "dsc/gaussianize.hpp"

#include <cmath>
#include <stdexcept>

#include "dsc/parallel.hpp"

namespace dsc {

GaussianizedCode::GaussianizedCode(MultiterminalCode base, int b)
    : base_(std::move(base)), mix_(MixingMatrix::build(b)) {
    if (base_.k < 1 || base_.n < 1) throw std::invalid_argument("wrap_code: malformed base code");
}

std::vector<std::uint64_t> GaussianizedCode::radices(int m) const {
    return std::vector<std::uint64_t>(static_cast<std::size_t>(b()), base_.index_sizes.at(m));
}

GaussianizedCode::EncodedBlocks GaussianizedCode::encode_blocks(const SourceBlock& block) const {
    const int n = base_.n, bb = b(), kk = base_.k;
    if (block.k != kk || block.L != static_cast<std::int64_t>(n) * bb)
        throw std::invalid_argument("encode_blocks: block must be k x (n*b)");
    EncodedBlocks out;
    out.mixed.reserve(kk);
    out.indices.assign(kk, std::vector<std::uint64_t>(bb));
    std::vector<double> stream(static_cast<std::size_t>(n) * bb);
    for (int m = 0; m < kk; ++m) {
        const auto row = block.row(m);
        for (int t = 0; t < n; ++t)
            mix_.apply(row.subspan(static_cast<std::size_t>(t) * bb, bb),
                       std::span<double>(stream).subspan(static_cast<std::size_t>(t) * bb, bb));
        out.mixed.push_back(interleave(stream, n, bb));
        for (int l = 0; l < bb; ++l)
            out.indices[m][l] = base_.encoders[m](out.mixed.back().vectors[l]);
    }
    return out;
}

PackedIndex GaussianizedCode::encode(int m, std::span<const double> x) const {
    const int n = base_.n, bb = b();
    if (static_cast<int>(x.size()) != n * bb)
        throw std::invalid_argument("encode: input length must be n*b");
    std::vector<double> stream(static_cast<std::size_t>(n) * bb);
    for (int t = 0; t < n; ++t)
        mix_.apply(x.subspan(static_cast<std::size_t>(t) * bb, bb),
                   std::span<double>(stream).subspan(static_cast<std::size_t>(t) * bb, bb));
    InterleavedBlocks blocks = interleave(stream, n, bb);
    std::vector<std::uint64_t> indices(bb);
    for (int l = 0; l < bb; ++l) indices[l] = base_.encoders[m](blocks.vectors[l]);
    return PackedIndex::pack(indices, radices(m));
}

std::vector<double> GaussianizedCode::decode(int m, std::span<const PackedIndex> packed) const {
    const int n = base_.n, bb = b(), kk = base_.k;
    if (static_cast<int>(packed.size()) != kk)
        throw std::invalid_argument("decode: need one packed index per encoder");
    std::vector<std::vector<std::uint64_t>> per_block(kk);
    for (int e = 0; e < kk; ++e) {
        per_block[e] = packed[e].unpack();
        if (static_cast<int>(per_block[e].size()) != bb)
            throw std::invalid_argument("decode: packed index has wrong block count");
    }
    InterleavedBlocks est;
    est.n = n;
    est.b = bb;
    est.vectors.assign(bb, std::vector<double>(n));
    std::vector<std::uint64_t> tuple(kk);
    for (int l = 0; l < bb; ++l) {
        for (int e = 0; e < kk; ++e) tuple[e] = per_block[e][l];
        est.vectors[l] = base_.decoders[m](tuple);
    }
    std::vector<double> stream = deinterleave(est);
    std::vector<double> out(static_cast<std::size_t>(n) * bb);
    for (int t = 0; t < n; ++t)
        mix_.apply_inverse(std::span<const double>(stream).subspan(static_cast<std::size_t>(t) * bb, bb),
                           std::span<double>(out).subspan(static_cast<std::size_t>(t) * bb, bb));
    return out;
}

DistortionEstimate evaluate_distortion(const GaussianizedCode& code, const SourceSpec& spec,
                                       int trials, std::uint64_t stream0, unsigned threads) {
    const int k = code.k();
    return detail::mc_distortion(
        k, code.block_length(), spec, trials, stream0, threads,
        [&code, k](const SourceBlock& block, std::vector<std::vector<double>>& rec) {
            std::vector<PackedIndex> packed(k);
            for (int m = 0; m < k; ++m) packed[m] = code.encode(m, block.row(m));
            for (int m = 0; m < k; ++m) rec[m] = code.decode(m, packed);
        });
}

PerBlockDistortion per_block_distortion(const GaussianizedCode& code, const SourceSpec& spec,
                                        int trials, std::uint64_t stream0, unsigned threads) {
    if (trials < 100) throw std::invalid_argument("per_block_distortion needs trials >= 100");
    if (spec.dim() != code.k())
        throw std::invalid_argument("source dimension must match encoder count");
    const int k = code.k(), n = code.base_n(), bb = code.b();

    constexpr std::int64_t kChunk = 64;
    const std::size_t n_chunks = chunk_count(trials, kChunk);
    // per chunk: k*b sums, k*b sums of squares, k overall sums, k overall sq
    std::vector<std::vector<double>> acc(n_chunks);

    parallel_chunks(
        trials, kChunk,
        [&](std::int64_t begin, std::int64_t end, std::size_t ci) {
            std::vector<double> a(static_cast<std::size_t>(2 * k * bb + 2 * k), 0.0);
            std::vector<std::uint64_t> tuple(k);
            for (std::int64_t t = begin; t < end; ++t) {
                SourceBlock block =
                    sample_iid(spec, static_cast<std::int64_t>(n) * bb,
                               stream0 + static_cast<std::uint64_t>(t) * k);
                auto enc = code.encode_blocks(block);
                for (int m = 0; m < k; ++m) {
                    double total = 0.0;
                    for (int l = 0; l < bb; ++l) {
                        for (int e = 0; e < k; ++e) tuple[e] = enc.indices[e][l];
                        const std::vector<double> est = code.base().decoders[m](tuple);
                        double d = 0.0;
                        for (int j = 0; j < n; ++j) {
                            const double r = enc.mixed[m].vectors[l][j] - est[j];
                            d += r * r;
                        }
                        d /= n;
                        a[(static_cast<std::size_t>(m) * bb + l) * 2] += d;
                        a[(static_cast<std::size_t>(m) * bb + l) * 2 + 1] += d * d;
                        total += d;
                    }
                    total /= bb;  // equals the full wrapped distortion by unitarity
                    a[static_cast<std::size_t>(2 * k * bb) + 2 * m] += total;
                    a[static_cast<std::size_t>(2 * k * bb) + 2 * m + 1] += total * total;
                }
            }
            acc[ci] = std::move(a);
        },
        threads);

    std::vector<double> folded(static_cast<std::size_t>(2 * k * bb + 2 * k), 0.0);
    for (const auto& a : acc)
        for (std::size_t i = 0; i < folded.size(); ++i) folded[i] += a[i];

    PerBlockDistortion out;
    out.mse.assign(k, std::vector<double>(bb));
    out.se.assign(k, std::vector<double>(bb));
    out.worst_block.assign(k, 0);
    out.overall.trials = trials;
    out.overall.mse.assign(k, 0.0);
    out.overall.se.assign(k, 0.0);
    for (int m = 0; m < k; ++m) {
        for (int l = 0; l < bb; ++l) {
            const double s = folded[(static_cast<std::size_t>(m) * bb + l) * 2];
            const double s2 = folded[(static_cast<std::size_t>(m) * bb + l) * 2 + 1];
            const double mean = s / trials;
            const double var = std::max(0.0, (s2 - trials * mean * mean) / (trials - 1.0));
            out.mse[m][l] = mean;
            out.se[m][l] = std::sqrt(var / trials);
            if (mean > out.mse[m][out.worst_block[m]]) out.worst_block[m] = l;
        }
        const double s = folded[static_cast<std::size_t>(2 * k * bb) + 2 * m];
        const double s2 = folded[static_cast<std::size_t>(2 * k * bb) + 2 * m + 1];
        const double mean = s / trials;
        const double var = std::max(0.0, (s2 - trials * mean * mean) / (trials - 1.0));
        out.overall.mse[m] = mean;
        out.overall.se[m] = std::sqrt(var / trials);
    }
    return out;
}

std::vector<ConvergenceRow> distortion_convergence(const MultiterminalCode& base,
                                                   const SourceSpec& spec,
                                                   std::span<const int> b_list, int trials,
                                                   std::uint64_t stream0, unsigned threads) {
    for (std::size_t i = 0; i < b_list.size(); ++i) {
        if (b_list[i] != 1 && (b_list[i] < 2 || b_list[i] % 2 != 0))
            throw std::invalid_argument("b_list entries must be 1 (raw) or even, got " +
                                        std::to_string(b_list[i]));
        if (i > 0 && b_list[i] <= b_list[i - 1])
            throw std::invalid_argument("b_list must be ascending");
    }
    SourceSpec gauss = spec;
    gauss.family = Family::gaussian;
    const DistortionEstimate ref = evaluate_distortion(base, gauss, trials, stream0, threads);

    std::vector<ConvergenceRow> rows;
    std::uint64_t stream = stream0 + (std::uint64_t{1} << 32);
    for (int b : b_list) {
        DistortionEstimate est;
        if (b == 1) {
            est = evaluate_distortion(base, spec, trials, stream, threads);
        } else {
            est = evaluate_distortion(wrap_code(base, b), spec, trials, stream, threads);
        }
        for (int m = 0; m < base.k; ++m)
            rows.push_back({b, m, est.mse[m], est.se[m], ref.mse[m], ref.se[m]});
        stream += (std::uint64_t{1} << 32);
    }
    return rows;
}

}  // namespace dsc
