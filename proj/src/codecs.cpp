#include "dsc/codecs.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <memory>
#include <numbers>
#include <ostream>

#include "dsc/parallel.hpp"

namespace dsc {

std::size_t ScalarCodebook::encode(double x) const {
    // number of thresholds <= x; a tie therefore lands in the upper cell
    return static_cast<std::size_t>(
        std::upper_bound(thresholds.begin(), thresholds.end(), x) - thresholds.begin());
}

void ScalarCodebook::validate() const {
    if (levels.empty()) throw std::invalid_argument("codebook has no levels");
    if (thresholds.size() + 1 != levels.size())
        throw std::invalid_argument("codebook threshold count must be levels-1");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (!(levels[i - 1] < levels[i]))
            throw std::invalid_argument("codebook levels must be strictly increasing");
    for (std::size_t i = 1; i < thresholds.size(); ++i)
        if (!(thresholds[i - 1] < thresholds[i]))
            throw std::invalid_argument("codebook thresholds must be strictly increasing");
    for (std::size_t i = 0; i < thresholds.size(); ++i)
        if (!(levels[i] <= thresholds[i] && thresholds[i] <= levels[i + 1]))
            throw std::invalid_argument("codebook threshold outside its level bracket");
}

ScalarCodebook lloyd_max_train(double variance, int rate, int max_iters, double tol) {
    if (!(variance > 0.0)) throw std::invalid_argument("lloyd_max_train: variance must be > 0");
    if (rate < 1 || rate > 20) throw std::invalid_argument("lloyd_max_train: rate must be 1..20 bits");
    if (max_iters < 1) throw std::invalid_argument("lloyd_max_train: max_iters must be >= 1");

    const int L = 1 << rate;
    const double sigma = std::sqrt(variance);
    constexpr int kGrid = 10000;
    constexpr double kSpan = 8.0;  // +-8 standard deviations

    // midpoint grid of the Gaussian density
    std::vector<double> gx(kGrid), gw(kGrid);
    const double h = 2.0 * kSpan * sigma / kGrid;
    for (int g = 0; g < kGrid; ++g) {
        const double x = -kSpan * sigma + (g + 0.5) * h;
        gx[g] = x;
        gw[g] = std::exp(-0.5 * x * x / variance) / (sigma * std::sqrt(2.0 * std::numbers::pi)) * h;
    }

    std::vector<double> levels(L);
    for (int i = 0; i < L; ++i) levels[i] = sigma * (-2.0 + 4.0 * (i + 0.5) / L);

    // accumulate per-cell pieces of each grid interval, splitting intervals
    // that straddle a threshold (the density is treated as constant over one
    // interval, so cell moments are second-order accurate in h)
    auto accumulate = [&](const std::vector<double>& lv, auto&& piece) {
        int cell = 0;
        for (int g = 0; g < kGrid; ++g) {
            const double lo = gx[g] - 0.5 * h, hi = gx[g] + 0.5 * h;
            const double density = gw[g] / h;
            while (cell + 1 < L && 0.5 * (lv[cell] + lv[cell + 1]) <= lo) ++cell;
            int c = cell;
            double left = lo;
            while (c + 1 < L) {
                const double th = 0.5 * (lv[c] + lv[c + 1]);
                if (th >= hi) break;
                piece(c, density * (th - left), 0.5 * (left + th));
                left = th;
                ++c;
            }
            piece(c, density * (hi - left), 0.5 * (left + hi));
        }
    };

    double movement = 0.0;
    bool converged = false;
    int iters = 0;
    std::vector<double> mass(L), moment(L);
    for (; iters < max_iters; ++iters) {
        std::fill(mass.begin(), mass.end(), 0.0);
        std::fill(moment.begin(), moment.end(), 0.0);
        accumulate(levels, [&](int c, double w, double x) {
            mass[c] += w;
            moment[c] += w * x;
        });
        movement = 0.0;
        for (int i = 0; i < L; ++i) {
            if (mass[i] <= 0.0) continue;  // empty cell: keep the level where it is
            const double next = moment[i] / mass[i];
            movement = std::max(movement, std::fabs(next - levels[i]));
            levels[i] = next;
        }
        if (movement < tol) {
            converged = true;
            break;
        }
    }

    ScalarCodebook cb;
    cb.levels = levels;
    cb.thresholds.resize(L - 1);
    for (int i = 0; i + 1 < L; ++i) cb.thresholds[i] = 0.5 * (levels[i] + levels[i + 1]);
    cb.design_variance = variance;
    double mse = 0.0;
    accumulate(levels, [&](int c, double w, double x) {
        const double r = x - levels[c];
        mse += w * r * r;
    });
    cb.train_mse = mse;
    cb.validate();
    if (!converged) throw lloyd_convergence_error(cb, iters, movement);
    return cb;
}

void save_codebook(const ScalarCodebook& cb, std::ostream& out) {
    out << "levels " << cb.levels.size() << "\n";
    out.precision(17);
    for (double v : cb.levels) out << v << "\n";
}

ScalarCodebook load_codebook(std::istream& in) {
    std::string tag;
    std::size_t count = 0;
    if (!(in >> tag >> count) || tag != "levels")
        throw std::invalid_argument("codebook file: expected 'levels <count>' header");
    ScalarCodebook cb;
    cb.levels.resize(count);
    for (auto& v : cb.levels)
        if (!(in >> v)) throw std::invalid_argument("codebook file: missing level entries");
    cb.thresholds.resize(count >= 1 ? count - 1 : 0);
    for (std::size_t i = 0; i + 1 < count; ++i)
        cb.thresholds[i] = 0.5 * (cb.levels[i] + cb.levels[i + 1]);
    cb.validate();
    return cb;
}

namespace {

std::uint64_t checked_index_size(std::size_t levels, int n) {
    // levels^n, must stay within 62 bits
    std::uint64_t size = 1;
    for (int i = 0; i < n; ++i) {
        if (size > (std::uint64_t{1} << 62) / levels)
            throw std::invalid_argument("product quantizer index exceeds 62 bits (n*rate too large)");
        size *= levels;
    }
    return size;
}

std::uint64_t product_encode(const ScalarCodebook& cb, std::span<const double> x) {
    std::uint64_t idx = 0;
    const std::uint64_t base = cb.size();
    for (double v : x) idx = idx * base + cb.encode(v);
    return idx;
}

std::vector<double> product_dequantize(const ScalarCodebook& cb, std::uint64_t idx, int n) {
    const std::uint64_t base = cb.size();
    std::vector<double> out(n);
    for (int j = n - 1; j >= 0; --j) {
        out[j] = cb.decode(static_cast<std::size_t>(idx % base));
        idx /= base;
    }
    return out;
}

}  // namespace

MultiterminalCode scalar_code_as_multiterminal(const std::vector<ScalarCodebook>& codebooks,
                                               int n) {
    if (codebooks.empty()) throw std::invalid_argument("need at least one codebook");
    if (n < 1) throw std::invalid_argument("blocklength must be >= 1");
    const int k = static_cast<int>(codebooks.size());
    MultiterminalCode code;
    code.k = k;
    code.n = n;
    auto books = std::make_shared<const std::vector<ScalarCodebook>>(codebooks);
    for (int m = 0; m < k; ++m) {
        code.index_sizes.push_back(checked_index_size((*books)[m].size(), n));
        code.rates.push_back(std::log2(static_cast<double>((*books)[m].size())));
        code.encoders.push_back([books, m, n](std::span<const double> x) {
            if (static_cast<int>(x.size()) != n)
                throw std::invalid_argument("encoder input length mismatch");
            return product_encode((*books)[m], x);
        });
        code.decoders.push_back([books, m, n](std::span<const std::uint64_t> idx) {
            return product_dequantize((*books)[m], idx[m], n);
        });
    }
    return code;
}

MultiterminalCode build_lmmse_decoder_code(const CovarianceMatrix& K,
                                           const std::vector<ScalarCodebook>& codebooks, int n) {
    const int k = static_cast<int>(codebooks.size());
    if (K.dim() != k) throw std::invalid_argument("covariance dimension must match codebook count");
    MultiterminalCode code = scalar_code_as_multiterminal(codebooks, n);

    Eigen::MatrixXd Km(k, k), A(k, k);
    for (int u = 0; u < k; ++u)
        for (int v = 0; v < k; ++v) Km(u, v) = K.at(u, v);
    A = Km;
    for (int m = 0; m < k; ++m) A(m, m) += codebooks[m].train_mse;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible())
        throw std::invalid_argument("build_lmmse_decoder_code: K + diag(q) is singular");
    Eigen::MatrixXd W = Km * lu.inverse();

    auto books = std::make_shared<const std::vector<ScalarCodebook>>(codebooks);
    auto weights = std::make_shared<const std::vector<double>>([&] {
        std::vector<double> w(static_cast<std::size_t>(k) * k);
        for (int u = 0; u < k; ++u)
            for (int v = 0; v < k; ++v) w[static_cast<std::size_t>(u) * k + v] = W(u, v);
        return w;
    }());

    for (int m = 0; m < k; ++m) {
        code.decoders[m] = [books, weights, m, k, n](std::span<const std::uint64_t> idx) {
            std::vector<std::vector<double>> y(k);
            for (int e = 0; e < k; ++e) y[e] = product_dequantize((*books)[e], idx[e], n);
            std::vector<double> out(n, 0.0);
            const double* wrow = weights->data() + static_cast<std::size_t>(m) * k;
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int e = 0; e < k; ++e) acc += wrow[e] * y[e][j];
                out[j] = acc;
            }
            return out;
        };
    }
    return code;
}

void RateDistortionVector::validate() const {
    if (rates.size() != distortions.size())
        throw std::invalid_argument("rate-distortion vector: length mismatch");
    for (double r : rates)
        if (!(r >= 0.0)) throw std::invalid_argument("rate-distortion vector: negative rate");
    for (double d : distortions)
        if (!(d >= 0.0)) throw std::invalid_argument("rate-distortion vector: negative distortion");
}

RateDistortionVector rate_distortion_point(const MultiterminalCode& code,
                                           const DistortionEstimate& estimate) {
    RateDistortionVector rd;
    rd.rates = code.rates;
    rd.distortions = estimate.mse;
    rd.validate();
    return rd;
}

MultiterminalCode rate_zero_code(int k, int n) {
    if (k < 1 || n < 1) throw std::invalid_argument("rate_zero_code: k and n must be >= 1");
    MultiterminalCode code;
    code.k = k;
    code.n = n;
    code.rates.assign(k, 0.0);
    code.index_sizes.assign(k, 1);
    for (int m = 0; m < k; ++m) {
        code.encoders.push_back([](std::span<const double>) { return std::uint64_t{0}; });
        code.decoders.push_back(
            [n](std::span<const std::uint64_t>) { return std::vector<double>(n, 0.0); });
    }
    return code;
}

namespace detail {

DistortionEstimate mc_distortion(
    int k, int n, const SourceSpec& spec, int trials, std::uint64_t stream0, unsigned threads,
    const std::function<void(const SourceBlock&, std::vector<std::vector<double>>&)>& reconstruct) {
    if (trials < 100) throw std::invalid_argument("distortion estimate needs trials >= 100");
    if (spec.dim() != k) throw std::invalid_argument("source dimension must match encoder count");

    constexpr std::int64_t kChunk = 256;
    const std::size_t n_chunks = chunk_count(trials, kChunk);
    std::vector<std::vector<double>> sums(n_chunks), sumsq(n_chunks);

    parallel_chunks(
        trials, kChunk,
        [&](std::int64_t begin, std::int64_t end, std::size_t ci) {
            std::vector<double> s(k, 0.0), s2(k, 0.0);
            std::vector<std::vector<double>> rec(k, std::vector<double>(n));
            for (std::int64_t t = begin; t < end; ++t) {
                SourceBlock block =
                    sample_iid(spec, n, stream0 + static_cast<std::uint64_t>(t) * k);
                reconstruct(block, rec);
                for (int m = 0; m < k; ++m) {
                    double d = 0.0;
                    for (int j = 0; j < n; ++j) {
                        const double r = block.at(m, j) - rec[m][j];
                        d += r * r;
                    }
                    d /= n;
                    s[m] += d;
                    s2[m] += d * d;
                }
            }
            sums[ci] = std::move(s);
            sumsq[ci] = std::move(s2);
        },
        threads);

    DistortionEstimate est;
    est.trials = trials;
    est.mse.assign(k, 0.0);
    est.se.assign(k, 0.0);
    for (std::size_t c = 0; c < n_chunks; ++c)
        for (int m = 0; m < k; ++m) {
            est.mse[m] += sums[c][m];
            est.se[m] += sumsq[c][m];
        }
    for (int m = 0; m < k; ++m) {
        const double mean = est.mse[m] / trials;
        const double var = std::max(0.0, (est.se[m] - trials * mean * mean) / (trials - 1.0));
        est.mse[m] = mean;
        est.se[m] = std::sqrt(var / trials);
    }
    return est;
}

}  // namespace detail

DistortionEstimate evaluate_distortion(const MultiterminalCode& code, const SourceSpec& spec,
                                       int trials, std::uint64_t stream0, unsigned threads) {
    return detail::mc_distortion(
        code.k, code.n, spec, trials, stream0, threads,
        [&code](const SourceBlock& block, std::vector<std::vector<double>>& rec) {
            std::vector<std::uint64_t> indices(code.k);
            for (int m = 0; m < code.k; ++m) indices[m] = code.encoders[m](block.row(m));
            for (int m = 0; m < code.k; ++m) rec[m] = code.decoders[m](indices);
        });
}

}  // namespace dsc
