#include "dsc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "dsc/mixing.hpp"
#include "dsc/rng.hpp"

namespace dsc {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must be in (0,1)");
    // Acklam's rational approximation, then one Halley refinement
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

double ks_critical_value(double alpha, std::size_t n) {
    if (n == 0) throw std::invalid_argument("ks_critical_value: empty sample");
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

ProjectionSample cramer_wold_projection(const SourceBlock& block, std::span<const double> t,
                                        const CovarianceMatrix& K) {
    if (static_cast<int>(t.size()) != block.k || K.dim() != block.k)
        throw std::invalid_argument("cramer_wold_projection: direction length mismatch");
    double norm2 = 0.0;
    for (double v : t) norm2 += v * v;
    if (norm2 == 0.0) throw std::invalid_argument("cramer_wold_projection: zero direction");
    ProjectionSample out;
    out.t.assign(t.begin(), t.end());
    out.sigma2 = K.quadratic_form(t);
    out.values.assign(static_cast<std::size_t>(block.L), 0.0);
    for (int m = 0; m < block.k; ++m) {
        const double tm = t[m];
        const double* row = block.data.data() + static_cast<std::size_t>(m) * block.L;
        for (std::int64_t i = 0; i < block.L; ++i) out.values[static_cast<std::size_t>(i)] += tm * row[i];
    }
    return out;
}

double ks_distance_to_normal(const ProjectionSample& sample) {
    if (sample.values.size() < 1000)
        throw std::invalid_argument("ks_distance_to_normal: need at least 1000 values");
    if (!(sample.sigma2 > 0.0))
        throw std::invalid_argument("ks_distance_to_normal: sigma^2 must be positive");
    std::vector<double> v = sample.values;
    std::sort(v.begin(), v.end());
    const double sigma = std::sqrt(sample.sigma2);
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = normal_cdf(v[i] / sigma);
        d = std::max(d, std::fabs((i + 1) / n - f));
        d = std::max(d, std::fabs(i / n - f));
    }
    return d;
}

ProjectionSample mixed_projection_sample(const SourceSpec& spec, std::span<const double> t, int b,
                                         std::int64_t n_samples, int row, std::uint64_t stream0) {
    const int k = spec.dim();
    if (static_cast<int>(t.size()) != k)
        throw std::invalid_argument("mixed_projection_sample: direction length mismatch");
    if (n_samples < 1) throw std::invalid_argument("mixed_projection_sample: need n_samples >= 1");
    if (b != 1 && (b < 2 || b % 2 != 0))
        throw std::invalid_argument("mixed_projection_sample: b must be 1 or even");
    if (row >= b) throw std::invalid_argument("mixed_projection_sample: row out of range");

    ProjectionSample out;
    out.t.assign(t.begin(), t.end());
    out.sigma2 = spec.K.quadratic_form(t);

    if (b == 1) {
        SourceBlock block = sample_iid(spec, n_samples, stream0);
        return cramer_wold_projection(block, t, spec.K);
    }

    // project first (the projection commutes with Q), then mix scalar blocks
    const MixingMatrix Q = MixingMatrix::build(b);
    const std::int64_t blocks =
        row >= 0 ? n_samples : (n_samples + b - 1) / b;
    SourceBlock raw = sample_iid(spec, blocks * b, stream0);
    ProjectionSample proj = cramer_wold_projection(raw, t, spec.K);
    out.values.reserve(static_cast<std::size_t>(n_samples));
    std::vector<double> mixed(b);
    for (std::int64_t blk = 0; blk < blocks; ++blk) {
        std::span<const double> chunk(proj.values.data() + blk * b, static_cast<std::size_t>(b));
        if (row >= 0) {
            double acc = 0.0;
            const auto qrow = Q.row(row);
            for (int j = 0; j < b; ++j) acc += qrow[j] * chunk[j];
            out.values.push_back(acc);
        } else {
            Q.apply(chunk, mixed);
            for (int l = 0; l < b && static_cast<std::int64_t>(out.values.size()) < n_samples; ++l)
                out.values.push_back(mixed[l]);
        }
    }
    return out;
}

namespace {

double row_envelope(const SourceSpec& spec, std::span<const double> t, int b, int row,
                    const MixingMatrix* Q) {
    double tb = 0.0;
    for (int m = 0; m < spec.dim(); ++m) {
        const double bound = marginal_support_bound(spec, m);
        if (!std::isfinite(bound)) return std::numeric_limits<double>::infinity();
        tb += std::fabs(t[m]) * bound;
    }
    double qmax = 0.0;
    if (b == 1) {
        qmax = 1.0;
    } else {
        for (int j = 0; j < b; ++j) qmax = std::max(qmax, std::fabs(Q->entry(row, j)));
    }
    return std::sqrt(static_cast<double>(b)) * qmax * tb;
}

}  // namespace

LindebergResult lindeberg_sum(const SourceSpec& spec, std::span<const double> t, int b, int row,
                              double epsilon, int trials, std::uint64_t stream0) {
    const int k = spec.dim();
    if (static_cast<int>(t.size()) != k)
        throw std::invalid_argument("lindeberg_sum: direction length mismatch");
    if (b != 1 && (b < 2 || b % 2 != 0))
        throw std::invalid_argument("lindeberg_sum: b must be 1 or even");
    if (row < 0 || row >= b) throw std::invalid_argument("lindeberg_sum: row out of range");
    if (!(epsilon > 0.0)) throw std::invalid_argument("lindeberg_sum: epsilon must be positive");
    if (trials < 1) throw std::invalid_argument("lindeberg_sum: trials must be >= 1");

    LindebergResult res;
    const double sigma2 = spec.K.quadratic_form(t);
    if (!(sigma2 > 0.0)) throw std::invalid_argument("lindeberg_sum: t'Kt must be positive");
    res.s_b2 = b * sigma2;
    res.threshold = epsilon * std::sqrt(res.s_b2);

    MixingMatrix Q = MixingMatrix::build(std::max(b, 2));
    const MixingMatrix* qp = b == 1 ? nullptr : &Q;
    res.envelope = row_envelope(spec, t, b, row, qp);
    res.analytically_zero = res.envelope < res.threshold;
    if (res.analytically_zero) {
        res.sum = 0.0;
        return res;
    }

    const double sqrt_b = std::sqrt(static_cast<double>(b));
    double acc = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        SourceBlock block = sample_iid(spec, b, stream0 + static_cast<std::uint64_t>(trial) * k);
        for (int j = 0; j < b; ++j) {
            double p = 0.0;
            for (int m = 0; m < k; ++m) p += t[m] * block.at(m, j);
            const double y = sqrt_b * p * (b == 1 ? 1.0 : Q.entry(row, j));
            if (std::fabs(y) >= res.threshold) acc += y * y;
        }
    }
    res.sum = acc / (static_cast<double>(trials) * res.s_b2);
    return res;
}

LindebergScan lindeberg_scan(const SourceSpec& spec, std::span<const double> t, int b,
                             double epsilon, int trials, std::uint64_t stream0) {
    const int k = spec.dim();
    if (static_cast<int>(t.size()) != k)
        throw std::invalid_argument("lindeberg_scan: direction length mismatch");
    if (b != 1 && (b < 2 || b % 2 != 0))
        throw std::invalid_argument("lindeberg_scan: b must be 1 or even");
    if (!(epsilon > 0.0)) throw std::invalid_argument("lindeberg_scan: epsilon must be positive");
    if (trials < 1) throw std::invalid_argument("lindeberg_scan: trials must be >= 1");

    const double sigma2 = spec.K.quadratic_form(t);
    if (!(sigma2 > 0.0)) throw std::invalid_argument("lindeberg_scan: t'Kt must be positive");
    MixingMatrix Q = MixingMatrix::build(std::max(b, 2));
    const MixingMatrix* qp = b == 1 ? nullptr : &Q;

    LindebergScan scan;
    scan.per_row.resize(static_cast<std::size_t>(b));
    std::vector<int> live;  // rows whose indicator can actually fire
    for (int row = 0; row < b; ++row) {
        auto& r = scan.per_row[row];
        r.s_b2 = b * sigma2;
        r.threshold = epsilon * std::sqrt(r.s_b2);
        r.envelope = row_envelope(spec, t, b, row, qp);
        r.analytically_zero = r.envelope < r.threshold;
        if (!r.analytically_zero) live.push_back(row);
    }
    if (!live.empty()) {
        // one sample per trial serves every row: same substreams as the
        // single-row estimator, so results agree call for call
        const double sqrt_b = std::sqrt(static_cast<double>(b));
        std::vector<double> acc(static_cast<std::size_t>(b), 0.0);
        std::vector<double> p(static_cast<std::size_t>(b));
        for (int trial = 0; trial < trials; ++trial) {
            SourceBlock block =
                sample_iid(spec, b, stream0 + static_cast<std::uint64_t>(trial) * k);
            for (int j = 0; j < b; ++j) {
                double s = 0.0;
                for (int m = 0; m < k; ++m) s += t[m] * block.at(m, j);
                p[j] = s;
            }
            for (int row : live) {
                const double thr = scan.per_row[row].threshold;
                double a = 0.0;
                for (int j = 0; j < b; ++j) {
                    const double y = sqrt_b * p[j] * (b == 1 ? 1.0 : Q.entry(row, j));
                    if (std::fabs(y) >= thr) a += y * y;
                }
                acc[row] += a;
            }
        }
        for (int row : live)
            scan.per_row[row].sum = acc[row] / (static_cast<double>(trials) * b * sigma2);
    }
    for (int row = 0; row < b; ++row)
        if (scan.per_row[row].sum > scan.per_row[scan.worst_row].sum) scan.worst_row = row;
    return scan;
}

std::vector<std::vector<double>> default_directions(int k) {
    if (k < 1) throw std::invalid_argument("default_directions: k must be >= 1");
    std::vector<std::vector<double>> dirs;
    for (int m = 0; m < k; ++m) {
        std::vector<double> e(k, 0.0);
        e[m] = 1.0;
        dirs.push_back(std::move(e));
    }
    if (k > 1) {
        dirs.emplace_back(k, 1.0);
        std::vector<double> alt(k);
        for (int m = 0; m < k; ++m) alt[m] = (m % 2 == 0) ? 1.0 : -1.0;
        dirs.push_back(std::move(alt));
    }
    return dirs;
}

}  // namespace dsc
